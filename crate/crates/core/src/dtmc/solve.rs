use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::{DtmcError, DtmcModel};

/// Numerical method for unbounded reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Linear,
    ValueIteration,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Backend::Linear),
            "vi" => Ok(Backend::ValueIteration),
            other => Err(format!("unknown backend `{other}` (expected linear or vi)")),
        }
    }
}

const GS_TOLERANCE: f64 = 1e-12;
const GS_MAX_SWEEPS: usize = 1_000_000;
const DENSE_LIMIT: usize = 512;
pub const VI_EPSILON: f64 = 1e-10;
const VI_MAX_ITERS: usize = 10_000_000;

fn predecessors(model: &DtmcModel) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); model.num_states()];
    for (s, row) in model.rows.iter().enumerate() {
        for &(t, _) in row {
            pred[t].push(s);
        }
    }
    pred
}

/// Backward search from `seeds` through states allowed by `through`.
fn backward(pred: &[Vec<usize>], seeds: &[bool], through: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = seeds.to_vec();
    let mut queue: VecDeque<usize> = (0..seeds.len()).filter(|&s| seeds[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !seen[s] && through(s) {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// States reaching `target` with probability zero and one, by graph search.
pub fn prob01_precompute(model: &DtmcModel, target: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let pred = predecessors(model);
    let can_reach = backward(&pred, target, |_| true);
    let prob0: Vec<bool> = can_reach.iter().map(|r| !r).collect();
    // A non-target state fails to have probability one iff it can reach a
    // probability-zero state without passing through the target.
    let can_fail = backward(&pred, &prob0, |s| !target[s]);
    let prob1 = can_fail.iter().map(|f| !f).collect();
    (prob0, prob1)
}

/// Reachability probabilities for every state.
pub fn reach_prob(model: &DtmcModel, target: &[bool], backend: Backend) -> Result<Vec<f64>, DtmcError> {
    match backend {
        Backend::Linear => reach_prob_linear(model, target),
        Backend::ValueIteration => reach_prob_vi(model, target, VI_EPSILON),
    }
}

/// Solves the linear system over the undecided states: Gauss-Seidel, with a
/// dense LU fallback for small systems that fail to converge.
pub fn reach_prob_linear(model: &DtmcModel, target: &[bool]) -> Result<Vec<f64>, DtmcError> {
    let (prob0, prob1) = prob01_precompute(model, target);
    let n = model.num_states();
    let mut x: Vec<f64> = (0..n).map(|s| if prob1[s] { 1.0 } else { 0.0 }).collect();
    let maybe: Vec<usize> = (0..n).filter(|&s| !prob0[s] && !prob1[s]).collect();
    if maybe.is_empty() {
        return Ok(x);
    }

    let mut delta = f64::INFINITY;
    for _ in 0..GS_MAX_SWEEPS {
        delta = 0.0;
        for &s in &maybe {
            let mut acc = 0.0;
            let mut diag = 0.0;
            for &(t, p) in &model.rows[s] {
                if t == s {
                    diag += p;
                } else {
                    acc += p * x[t];
                }
            }
            let v = acc / (1.0 - diag);
            delta = delta.max((v - x[s]).abs());
            x[s] = v;
        }
        if delta < GS_TOLERANCE {
            return Ok(x);
        }
    }
    if maybe.len() <= DENSE_LIMIT {
        return dense_solve(model, &prob1, &maybe, x);
    }
    Err(DtmcError::NoConvergence { iterations: GS_MAX_SWEEPS, residual: delta })
}

fn dense_solve(model: &DtmcModel, prob1: &[bool], maybe: &[usize], mut x: Vec<f64>) -> Result<Vec<f64>, DtmcError> {
    let m = maybe.len();
    let mut index = vec![usize::MAX; model.num_states()];
    for (k, &s) in maybe.iter().enumerate() {
        index[s] = k;
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (k, &s) in maybe.iter().enumerate() {
        for &(t, p) in &model.rows[s] {
            if index[t] != usize::MAX {
                a[(k, index[t])] -= p;
            } else if prob1[t] {
                b[k] += p;
            }
        }
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or(DtmcError::Invalid("singular system in dense fallback".into()))?;
    for (k, &s) in maybe.iter().enumerate() {
        x[s] = sol[k];
    }
    Ok(x)
}

/// Jacobi value iteration until the largest update falls below `epsilon`.
/// Probability-zero and probability-one states are fixed up front.
pub fn reach_prob_vi(model: &DtmcModel, target: &[bool], epsilon: f64) -> Result<Vec<f64>, DtmcError> {
    let (prob0, prob1) = prob01_precompute(model, target);
    let mut x: Vec<f64> = prob1.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let maybe: Vec<usize> = (0..model.num_states()).filter(|&s| !prob0[s] && !prob1[s]).collect();
    let mut next = x.clone();
    let mut delta = f64::INFINITY;
    for _ in 0..VI_MAX_ITERS {
        delta = 0.0;
        for &s in &maybe {
            let v: f64 = model.rows[s].iter().map(|&(t, p)| p * x[t]).sum();
            delta = delta.max((v - x[s]).abs());
            next[s] = v;
        }
        std::mem::swap(&mut x, &mut next);
        if delta < epsilon {
            return Ok(x);
        }
    }
    Err(DtmcError::NoConvergence { iterations: VI_MAX_ITERS, residual: delta })
}

/// Probability of reaching `target` within exactly `k` steps or fewer.
pub fn bounded_reach(model: &DtmcModel, target: &[bool], k: u64) -> Vec<f64> {
    let n = model.num_states();
    let mut x: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let mut next = x.clone();
    for _ in 0..k {
        for s in 0..n {
            next[s] = if target[s] { 1.0 } else { model.rows[s].iter().map(|&(t, p)| p * x[t]).sum() };
        }
        std::mem::swap(&mut x, &mut next);
    }
    x
}
