use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::DtmcModel;

/// A finite path from the initial state, with its probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePath {
    pub states: Vec<usize>,
    pub probability: f64,
    /// Action annotation of every state after the first.
    pub actions: Vec<Option<String>>,
}

struct Partial {
    prob: f64,
    path: Vec<usize>,
}

impl PartialEq for Partial {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Partial {}

impl PartialOrd for Partial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Partial {
    /// Max-heap order: higher probability, then shorter, then lexicographically smaller.
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then_with(|| other.path.len().cmp(&self.path.len()))
            .then_with(|| other.path.cmp(&self.path))
    }
}

/// The `k` most probable paths from the initial state to the first visit of
/// a target state, ordered by probability, then length, then state sequence.
pub fn most_probable_paths(model: &DtmcModel, target: &[bool], k: usize) -> Vec<TracePath> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let mut pops = vec![0usize; model.num_states()];
    let mut heap = BinaryHeap::new();
    heap.push(Partial { prob: 1.0, path: vec![model.initial] });
    while let Some(Partial { prob, path }) = heap.pop() {
        let last = *path.last().expect("paths are nonempty");
        if pops[last] >= k {
            continue;
        }
        pops[last] += 1;
        if target[last] {
            let actions = path[1..].iter().map(|&s| model.states[s].action.clone()).collect();
            out.push(TracePath { states: path, probability: prob, actions });
            if out.len() == k {
                break;
            }
            continue;
        }
        for &(t, p) in &model.rows[last] {
            let mut next = path.clone();
            next.push(t);
            heap.push(Partial { prob: prob * p, path: next });
        }
    }
    out
}
