//! Course-of-plans trees, rewards as goal-reachability probabilities, and
//! plan selection.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::agent::{AgentProgram, EventSet, Predicate};
use crate::dtmc::{most_probable_paths, DtmcModel};

mod reward;
mod symbolic;
mod to_dtmc;
mod tree;

pub use reward::{compute_rewards, node_values, reward_update, select_plan, RewardTable, Valuer};
pub use symbolic::enumerate_symbolic_plans;
pub use to_dtmc::{brute_force_rewards, tree_to_dtmc, Policy, GOAL_LABEL};
pub use tree::{build_tree, CourseOfPlans, CoursePlanTree, ImplicationTable, NodeKind, TreeNode};

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("plan `{0}` has no entry in the implication table")]
    Incomplete(String),
    #[error("policy: {0}")]
    Policy(String),
    #[error("{0}")]
    Invalid(String),
}

/// Action annotating the first transition of the most probable path to
/// `target`, with that path's probability.
pub fn counterexample_select(model: &DtmcModel, target: &[bool]) -> Option<(String, f64)> {
    let path = most_probable_paths(model, target, 1).into_iter().next()?;
    let action = path.actions.first()?.clone()?;
    Some((action, path.probability))
}

/// One selector decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRecord {
    pub cycle: u64,
    pub desires: Vec<String>,
    pub rewards: BTreeMap<String, f64>,
    pub chosen: Option<String>,
    pub recommended: Option<String>,
    pub path_probability: Option<f64>,
}

/// Builds the tree for the current beliefs and events, scores the desire
/// set, picks the best plan and asks the counterexample selector for a
/// second opinion on the uniform-policy chain.
#[allow(clippy::too_many_arguments)]
pub fn select_at(
    program: &AgentProgram,
    table: &ImplicationTable,
    beliefs: &BTreeSet<Predicate>,
    events: &EventSet,
    goal: &BTreeSet<Predicate>,
    horizon: usize,
    valuer: Option<Valuer>,
    cycle: u64,
) -> Result<SelectionRecord, SelectError> {
    let t = build_tree(program, table, beliefs, events, horizon)?;
    let desires = t.root_plans();
    let rewards = compute_rewards(&t, goal, valuer, cycle);
    let chosen = select_plan(&desires, &rewards);
    let model = tree_to_dtmc(program, &t, &Policy::Uniform, goal, valuer)?;
    let target: Vec<bool> = model.states.iter().map(|s| s.labels.contains(GOAL_LABEL)).collect();
    let rec = counterexample_select(&model, &target);
    let name = |p: usize| program.plans[p].name.clone();
    Ok(SelectionRecord {
        cycle,
        desires: desires.iter().map(|&p| name(p)).collect(),
        rewards: rewards.values.iter().map(|(&p, &v)| (name(p), v)).collect(),
        chosen: chosen.map(name),
        path_probability: rec.as_ref().map(|r| r.1),
        recommended: rec.map(|r| r.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    #[test]
    fn counterexample_prefers_the_likelier_plan() {
        let prog = parse_program(
            "belief start. action a run_once feedback { 1: ; }.
             plan weak: +start : true <- a.
             plan strong: +start : true <- a.
             outcomes weak { 0.4: goal; 0.6: ; }.
             outcomes strong { 0.9: goal; 0.1: ; }.",
        )
        .unwrap();
        let s: BTreeSet<Predicate> = [Predicate::atom("start")].into();
        let goal: BTreeSet<Predicate> = [Predicate::atom("goal")].into();
        let rec = select_at(&prog, &ImplicationTable::from_program(&prog), &s, &s, &goal, 1, None, 3).unwrap();
        assert_eq!(rec.chosen.as_deref(), Some("strong"));
        assert_eq!(rec.recommended.as_deref(), Some("strong"));
        assert!((rec.path_probability.unwrap() - 0.45).abs() < 1e-12);
        assert_eq!(rec.desires, vec!["weak", "strong"]);
    }

    #[test]
    fn no_path_means_no_recommendation() {
        let m = crate::dtmc::model::tests::chain(vec![vec![(0, 1.0)], vec![(1, 1.0)]]);
        assert_eq!(counterexample_select(&m, &[false, true]), None);
    }
}
