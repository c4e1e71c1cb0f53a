//! Criterion benchmarks for the solver and model-building paths; see `benches/`.
