use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::expr::{Expr, Scope, Value};

use super::DtmcError;

#[derive(Debug, Clone, PartialEq)]
pub struct StateInfo {
    pub valuation: Vec<i64>,
    pub labels: BTreeSet<String>,
    /// Action annotation: what fired on entering this state.
    pub action: Option<String>,
}

impl Scope for StateInfo {
    fn var(&self, slot: usize) -> i64 {
        self.valuation[slot]
    }

    fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }
}

/// An explicit-state discrete-time Markov chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DtmcModel {
    pub vars: Vec<String>,
    pub states: Vec<StateInfo>,
    pub initial: usize,
    /// Sparse rows, sorted by target, no duplicate targets.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub constants: BTreeMap<String, Value>,
    /// States that had no outgoing transitions and received a self-loop.
    pub deadlocks: Vec<usize>,
}

impl DtmcModel {
    /// Validates and normalises the transition structure: merges duplicate
    /// targets, drops zero entries, adds self-loops to deadlocks and checks
    /// every row sums to one.
    pub fn new(
        vars: Vec<String>,
        states: Vec<StateInfo>,
        initial: usize,
        rows: Vec<Vec<(usize, f64)>>,
        constants: BTreeMap<String, Value>,
    ) -> Result<Self, DtmcError> {
        let n = states.len();
        if rows.len() != n {
            return Err(DtmcError::Invalid(format!("{} rows for {n} states", rows.len())));
        }
        if initial >= n {
            return Err(DtmcError::Invalid(format!("initial state {initial} out of range")));
        }
        let mut deadlocks = Vec::new();
        let mut clean = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (t, p) in row {
                if t >= n {
                    return Err(DtmcError::Invalid(format!("state {i}: target {t} out of range")));
                }
                if p.is_nan() || p < 0.0 {
                    return Err(DtmcError::Invalid(format!("state {i}: negative probability {p}")));
                }
                *merged.entry(t).or_default() += p;
            }
            merged.retain(|_, p| *p > 0.0);
            if merged.is_empty() {
                deadlocks.push(i);
                merged.insert(i, 1.0);
            }
            let sum: f64 = merged.values().sum();
            if (sum - 1.0).abs() > crate::PROB_TOLERANCE {
                return Err(DtmcError::NotStochastic { state: i, sum });
            }
            clean.push(merged.into_iter().collect());
        }
        Ok(DtmcModel { vars, states, initial, rows: clean, constants, deadlocks })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Resolves identifiers in `expr` against this model's variables and constants.
    pub fn resolve(&self, expr: &Expr) -> Result<Expr, DtmcError> {
        Ok(expr.resolve(&|name| self.var_index(name), &self.constants)?)
    }

    /// Marks the states satisfying a (possibly unresolved) boolean expression.
    pub fn states_where(&self, expr: &Expr) -> Result<Vec<bool>, DtmcError> {
        let resolved = self.resolve(expr)?;
        self.states.iter().map(|s| Ok(resolved.eval_bool(s)?)).collect()
    }

    /// States with a self-loop of probability one.
    pub fn is_absorbing(&self, s: usize) -> bool {
        self.rows[s].len() == 1 && self.rows[s][0].0 == s
    }

    /// Text dump: one line per state with its valuation, labels and row.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dtmc states={} transitions={} initial={} vars=[{}]",
            self.num_states(),
            self.num_transitions(),
            self.initial,
            self.vars.join(",")
        );
        for (i, s) in self.states.iter().enumerate() {
            let vals: Vec<String> = self.vars.iter().zip(&s.valuation).map(|(n, v)| format!("{n}={v}")).collect();
            let labels: Vec<&str> = s.labels.iter().map(String::as_str).collect();
            let row: Vec<String> = self.rows[i].iter().map(|(t, p)| format!("{t}:{p:.16e}")).collect();
            let _ = writeln!(out, "{i} {{{}}} [{}] -> {}", vals.join(","), labels.join(","), row.join(", "));
        }
        out
    }
}
