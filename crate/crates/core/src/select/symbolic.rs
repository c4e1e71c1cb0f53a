use std::collections::BTreeSet;

use super::tree::{close, ImplicationTable};
use crate::agent::{AgentProgram, BeliefBase, Predicate, Source};

fn context_holds(program: &AgentProgram, plan: usize, beliefs: &BTreeSet<Predicate>) -> bool {
    let base: BeliefBase = beliefs.iter().map(|p| (p.clone(), Source::MentalNote)).collect();
    program.plans[plan].context_holds(&base)
}

/// Plan sequences of length at most `depth` that can reach `goal`: each
/// plan's context holds after some outcome of its predecessor, and some
/// outcome of the last plan yields beliefs containing the goal. Triggers
/// are ignored; a sequence stops at its first goal-reaching plan. Sorted by
/// length, then plan ids.
pub fn enumerate_symbolic_plans(
    program: &AgentProgram,
    table: &ImplicationTable,
    beliefs: &BTreeSet<Predicate>,
    goal: &BTreeSet<Predicate>,
    depth: usize,
) -> Vec<Vec<usize>> {
    let mut found: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let start = close(program, beliefs);
    if depth == 0 || goal.is_subset(&start) {
        return Vec::new();
    }
    let mut stack = vec![(start, Vec::new())];
    while let Some((b, seq)) = stack.pop() {
        for plan in 0..program.plans.len() {
            let Some(outcomes) = table.get(plan) else { continue };
            if !context_holds(program, plan, &b) {
                continue;
            }
            let mut next_seq = seq.clone();
            next_seq.push(plan);
            for o in outcomes {
                let mut next = b.clone();
                next.extend(o.predicates.iter().cloned());
                let next = close(program, &next);
                if goal.is_subset(&next) {
                    found.insert((next_seq.len(), next_seq.clone()));
                } else if next_seq.len() < depth {
                    stack.push((next, next_seq.clone()));
                }
            }
        }
    }
    found.into_iter().map(|(_, s)| s).collect()
}
