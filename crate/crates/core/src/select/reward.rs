use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::tree::{build_tree, CoursePlanTree, ImplicationTable, NodeKind, TreeNode};
use super::SelectError;
use crate::agent::{AgentProgram, EventSet, Predicate};

/// Value of a leaf that does not satisfy the goal, e.g. a reachability
/// probability from an external model. `None` means zero.
pub type Valuer<'a> = &'a dyn Fn(&TreeNode) -> Option<f64>;

/// Reward per root plan at a given cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RewardTable {
    pub cycle: u64,
    pub values: BTreeMap<usize, f64>,
}

pub(crate) fn satisfies(node: &TreeNode, goal: &BTreeSet<Predicate>) -> bool {
    node.beliefs().is_some_and(|b| goal.is_subset(b))
}

/// Node values: max over plan choices, expectation over outcomes; goal
/// nodes are worth one.
pub fn node_values(tree: &CoursePlanTree, goal: &BTreeSet<Predicate>, valuer: Option<Valuer>) -> Vec<f64> {
    let mut values = vec![0.0; tree.nodes.len()];
    // Children always have larger indices than their parent.
    for n in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[n];
        values[n] = match node.kind {
            NodeKind::Event { .. } if satisfies(node, goal) => 1.0,
            NodeKind::Event { .. } if node.is_leaf() => valuer.and_then(|v| v(node)).unwrap_or(0.0),
            NodeKind::Event { .. } => node.children.iter().map(|&(c, _)| values[c]).fold(0.0, f64::max),
            NodeKind::Plan { .. } => node.children.iter().map(|&(c, p)| p * values[c]).sum(),
        };
    }
    values
}

/// Reward of each root plan: the best achievable goal probability after
/// committing to it.
pub fn compute_rewards(
    tree: &CoursePlanTree,
    goal: &BTreeSet<Predicate>,
    valuer: Option<Valuer>,
    cycle: u64,
) -> RewardTable {
    let values = node_values(tree, goal, valuer);
    let values = tree
        .root()
        .children
        .iter()
        .map(|&(c, _)| (tree.nodes[c].plan().expect("root children are plans"), values[c]))
        .collect();
    RewardTable { cycle, values }
}

/// Recomputes the table for the current beliefs. `prev` only feeds the
/// debug log.
#[allow(clippy::too_many_arguments)]
pub fn reward_update(
    prev: &RewardTable,
    program: &AgentProgram,
    table: &ImplicationTable,
    beliefs: &BTreeSet<Predicate>,
    events: &EventSet,
    goal: &BTreeSet<Predicate>,
    horizon: usize,
    valuer: Option<Valuer>,
    cycle: u64,
) -> Result<RewardTable, SelectError> {
    let tree = build_tree(program, table, beliefs, events, horizon)?;
    let next = compute_rewards(&tree, goal, valuer, cycle);
    for (plan, v) in &next.values {
        match prev.values.get(plan) {
            Some(old) if old != v => log::debug!("reward of plan {plan}: {old} -> {v}"),
            None => log::debug!("reward of plan {plan}: new {v}"),
            _ => {}
        }
    }
    Ok(next)
}

/// Highest-reward plan among `desires`; ties go to the lowest plan id.
pub fn select_plan(desires: &[usize], rewards: &RewardTable) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut sorted = desires.to_vec();
    sorted.sort_unstable();
    for plan in sorted {
        let r = rewards.values.get(&plan).copied().unwrap_or(0.0);
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((plan, r));
        }
    }
    best.map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::tree::tests::branching_sample;

    fn goal() -> BTreeSet<Predicate> {
        [Predicate::atom("goal")].into()
    }

    fn start() -> BTreeSet<Predicate> {
        [Predicate::atom("start")].into()
    }

    #[test]
    fn branching_rewards_by_hand() {
        let prog = branching_sample();
        let t = build_tree(&prog, &ImplicationTable::from_program(&prog), &start(), &start(), 2).unwrap();
        let r = compute_rewards(&t, &goal(), None, 0);
        // p1: 0.7 * max(1, 0.5) + 0.3 * 0.2; p2: 0.4 * 0.2.
        assert!((r.values[&0] - 0.76).abs() < 1e-12);
        assert!((r.values[&1] - 0.08).abs() < 1e-12);
        assert_eq!(select_plan(&[0, 1], &r), Some(0));
    }

    #[test]
    fn selection_rules() {
        let table = |a, b| RewardTable { cycle: 0, values: [(0, a), (1, b)].into() };
        assert_eq!(select_plan(&[0, 1], &table(0.4, 0.7)), Some(1));
        assert_eq!(select_plan(&[1, 0], &table(0.5, 0.5)), Some(0));
        assert_eq!(select_plan(&[], &table(0.5, 0.5)), None);
    }

    #[test]
    fn valuer_scores_non_goal_leaves() {
        let prog = branching_sample();
        let t = build_tree(&prog, &ImplicationTable::from_program(&prog), &start(), &start(), 1).unwrap();
        let r = compute_rewards(&t, &goal(), Some(&|_| Some(0.5)), 0);
        assert!((r.values[&0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unchanged_inputs_give_identical_tables() {
        let prog = branching_sample();
        let table = ImplicationTable::from_program(&prog);
        let a = reward_update(&RewardTable::default(), &prog, &table, &start(), &start(), &goal(), 2, None, 1).unwrap();
        let b = reward_update(&a, &prog, &table, &start(), &start(), &goal(), 2, None, 1).unwrap();
        assert_eq!(a, b);
    }
}
