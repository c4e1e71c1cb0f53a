use std::collections::{BTreeMap, BTreeSet};

use super::reward::{satisfies, Valuer};
use super::tree::{CoursePlanTree, NodeKind};
use super::SelectError;
use crate::agent::{AgentProgram, Predicate};
use crate::dtmc::{check_query, Backend, DtmcModel, ReachQuery, StateInfo};
use crate::expr::Expr;

/// How plan choices at event nodes are resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// Event node -> chosen plan id.
    Fixed(BTreeMap<usize, usize>),
    /// Every triggered plan equally likely.
    Uniform,
}

pub const GOAL_LABEL: &str = "goal";

/// Collapses event/plan alternation into a chain over event nodes. Goal
/// nodes are absorbing and labelled `goal`; a leaf with value `v` from
/// `valuer` moves to a goal sink with probability `v` and to a fail sink
/// otherwise. States carry the chosen plan's name as their action.
pub fn tree_to_dtmc(
    program: &AgentProgram,
    tree: &CoursePlanTree,
    policy: &Policy,
    goal: &BTreeSet<Predicate>,
    valuer: Option<Valuer>,
) -> Result<DtmcModel, SelectError> {
    let n = tree.nodes.len();
    let (goal_sink, fail_sink) = (n, n + 1);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + 2];
    let mut action: Vec<Option<String>> = vec![None; n + 2];
    let mut labels: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n + 2];
    labels[goal_sink].insert(GOAL_LABEL.to_string());
    rows[goal_sink].push((goal_sink, 1.0));
    rows[fail_sink].push((fail_sink, 1.0));

    let mut stack = vec![0usize];
    while let Some(e) = stack.pop() {
        let node = &tree.nodes[e];
        if satisfies(node, goal) {
            labels[e].insert(GOAL_LABEL.to_string());
            rows[e].push((e, 1.0));
            continue;
        }
        if node.is_leaf() {
            let v = valuer.and_then(|f| f(node)).unwrap_or(0.0);
            rows[e].push((goal_sink, v));
            rows[e].push((fail_sink, 1.0 - v));
            continue;
        }
        let chosen: Vec<(usize, f64)> = match policy {
            Policy::Fixed(map) => {
                let plan = *map.get(&e).ok_or_else(|| SelectError::Policy(format!("no choice at node {e}")))?;
                let p = tree.plan_child(e, plan).ok_or_else(|| {
                    SelectError::Policy(format!("plan `{}` is not triggered at node {e}", program.plans[plan].name))
                })?;
                vec![(p, 1.0)]
            }
            Policy::Uniform => {
                let k = node.children.len() as f64;
                node.children.iter().map(|&(c, _)| (c, 1.0 / k)).collect()
            }
        };
        for (p, w) in chosen {
            let plan = tree.nodes[p].plan().expect("plan node");
            for &(c, prob) in &tree.nodes[p].children {
                rows[e].push((c, w * prob));
                action[c] = Some(program.plans[plan].name.clone());
                stack.push(c);
            }
        }
    }

    let states = (0..n + 2)
        .map(|i| StateInfo { valuation: vec![i as i64], labels: std::mem::take(&mut labels[i]), action: action[i].take() })
        .collect();
    DtmcModel::new(vec!["node".into()], states, 0, rows, BTreeMap::new()).map_err(|e| SelectError::Invalid(e.to_string()))
}

/// Reference rewards: enumerates every deterministic policy, builds its
/// chain and checks `P=? [ F "goal" ]`. Exponential; for testing.
pub fn brute_force_rewards(
    program: &AgentProgram,
    tree: &CoursePlanTree,
    goal: &BTreeSet<Predicate>,
    valuer: Option<Valuer>,
) -> Result<BTreeMap<usize, f64>, SelectError> {
    let choice_nodes: Vec<usize> = (0..tree.nodes.len())
        .filter(|&i| matches!(tree.nodes[i].kind, NodeKind::Event { .. }) && !tree.nodes[i].is_leaf())
        .collect();
    let query = ReachQuery::eventually(Expr::Label(GOAL_LABEL.into()));
    let mut best: BTreeMap<usize, f64> = tree.root_plans().into_iter().map(|p| (p, 0.0)).collect();
    let mut digits = vec![0usize; choice_nodes.len()];
    loop {
        let map: BTreeMap<usize, usize> = choice_nodes
            .iter()
            .zip(&digits)
            .map(|(&e, &d)| (e, tree.nodes[tree.nodes[e].children[d].0].plan().expect("plan node")))
            .collect();
        let root_plan = map.get(&0).copied();
        let model = tree_to_dtmc(program, tree, &Policy::Fixed(map), goal, valuer)?;
        let p = check_query(&model, &query, Backend::Linear).map_err(|e| SelectError::Invalid(e.to_string()))?;
        if let Some(rp) = root_plan {
            let b = best.get_mut(&rp).expect("root plan");
            *b = b.max(p);
        }
        let mut i = digits.len();
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < tree.nodes[choice_nodes[i]].children.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}
