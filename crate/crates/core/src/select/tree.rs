use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::SelectError;
use crate::agent::{apply_rules, AgentProgram, BeliefBase, EventSet, Outcome, Predicate, Source};

/// Per-plan outcome distributions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImplicationTable {
    pub entries: BTreeMap<usize, Vec<Outcome>>,
}

impl ImplicationTable {
    pub fn from_program(program: &AgentProgram) -> Self {
        ImplicationTable { entries: program.outcomes.clone() }
    }

    pub fn get(&self, plan: usize) -> Option<&[Outcome]> {
        self.entries.get(&plan).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Event { events: EventSet, beliefs: BTreeSet<Predicate> },
    Plan { plan: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub kind: NodeKind,
    /// Event nodes: plan children with weight 1. Plan nodes: outcome
    /// children with their probabilities.
    pub children: Vec<(usize, f64)>,
    /// Number of plan layers above this node.
    pub depth: usize,
}

impl TreeNode {
    pub fn beliefs(&self) -> Option<&BTreeSet<Predicate>> {
        match &self.kind {
            NodeKind::Event { beliefs, .. } => Some(beliefs),
            NodeKind::Plan { .. } => None,
        }
    }

    pub fn plan(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Plan { plan } => Some(plan),
            NodeKind::Event { .. } => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Alternating event/plan layers; node 0 is the root event node.
#[derive(Debug, Clone, PartialEq)]
pub struct CoursePlanTree {
    pub nodes: Vec<TreeNode>,
    pub horizon: usize,
}

/// One root-to-leaf branch: the plans chosen, the leaf's events and the
/// product of outcome probabilities along it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourseOfPlans {
    pub plans: Vec<usize>,
    pub events: Vec<Predicate>,
    pub likelihood: f64,
    pub leaf: usize,
}

pub(crate) fn close(program: &AgentProgram, beliefs: &BTreeSet<Predicate>) -> BTreeSet<Predicate> {
    let base: BeliefBase = beliefs.iter().map(|p| (p.clone(), Source::MentalNote)).collect();
    apply_rules(&base, &program.rules).into_keys().collect()
}

/// Plans triggered by `events` whose context holds in `beliefs`, in
/// declaration order.
pub(crate) fn triggered(program: &AgentProgram, events: &EventSet, beliefs: &BTreeSet<Predicate>) -> Vec<usize> {
    let base: BeliefBase = beliefs.iter().map(|p| (p.clone(), Source::MentalNote)).collect();
    crate::agent::applicable_plans(program, events, &base)
}

/// Expands the course-of-plans tree from `root_events` up to `horizon`
/// plan layers. Outcomes are added to the beliefs along each branch.
pub fn build_tree(
    program: &AgentProgram,
    table: &ImplicationTable,
    beliefs: &BTreeSet<Predicate>,
    root_events: &EventSet,
    horizon: usize,
) -> Result<CoursePlanTree, SelectError> {
    if horizon == 0 {
        return Err(SelectError::Invalid("horizon must be at least 1".into()));
    }
    let root = TreeNode {
        kind: NodeKind::Event { events: root_events.clone(), beliefs: close(program, beliefs) },
        children: Vec::new(),
        depth: 0,
    };
    let mut nodes = vec![root];
    let mut stack = vec![0usize];
    while let Some(n) = stack.pop() {
        let (events, beliefs, depth) = match &nodes[n].kind {
            NodeKind::Event { events, beliefs } => (events.clone(), beliefs.clone(), nodes[n].depth),
            NodeKind::Plan { .. } => unreachable!("only event nodes are queued"),
        };
        if depth >= horizon {
            continue;
        }
        for plan in triggered(program, &events, &beliefs) {
            let outcomes = table
                .get(plan)
                .ok_or_else(|| SelectError::Incomplete(program.plans[plan].name.clone()))?;
            let pnode = nodes.len();
            nodes.push(TreeNode { kind: NodeKind::Plan { plan }, children: Vec::new(), depth });
            nodes[n].children.push((pnode, 1.0));
            for o in outcomes {
                let mut next = beliefs.clone();
                next.extend(o.predicates.iter().cloned());
                let next = close(program, &next);
                let events: EventSet = o.predicates.clone();
                let e = nodes.len();
                nodes.push(TreeNode {
                    kind: NodeKind::Event { events, beliefs: next },
                    children: Vec::new(),
                    depth: depth + 1,
                });
                nodes[pnode].children.push((e, o.probability));
                stack.push(e);
            }
        }
    }
    Ok(CoursePlanTree { nodes, horizon })
}

impl CoursePlanTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Plans offered at the root, in declaration order.
    pub fn root_plans(&self) -> Vec<usize> {
        self.root().children.iter().filter_map(|&(c, _)| self.nodes[c].plan()).collect()
    }

    /// Plan-node child of `event` for `plan`.
    pub fn plan_child(&self, event: usize, plan: usize) -> Option<usize> {
        self.nodes[event].children.iter().map(|&(c, _)| c).find(|&c| self.nodes[c].plan() == Some(plan))
    }

    /// All branches under a policy choosing a plan at every non-leaf event
    /// node (`choice(node) -> plan`).
    pub fn branches(&self, choice: &dyn Fn(usize) -> Option<usize>) -> Vec<CourseOfPlans> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new(), 1.0f64)];
        while let Some((n, plans, lambda)) = stack.pop() {
            let node = &self.nodes[n];
            let pick = if node.is_leaf() { None } else { choice(n).and_then(|p| self.plan_child(n, p)) };
            match pick {
                None => {
                    let events = match &node.kind {
                        NodeKind::Event { events, .. } => events.iter().cloned().collect(),
                        NodeKind::Plan { .. } => Vec::new(),
                    };
                    out.push(CourseOfPlans { plans, events, likelihood: lambda, leaf: n });
                }
                Some(p) => {
                    let plan = self.nodes[p].plan().expect("plan node");
                    for &(c, prob) in self.nodes[p].children.iter().rev() {
                        let mut seq = plans.clone();
                        seq.push(plan);
                        stack.push((c, seq, lambda * prob));
                    }
                }
            }
        }
        out
    }

    /// Number of deterministic policies: product over event nodes of the
    /// number of plan choices, saturating.
    pub fn policy_count(&self) -> u128 {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Event { .. }) && !n.is_leaf())
            .fold(1u128, |acc, n| acc.saturating_mul(n.children.len() as u128))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dsl::parse_program;

    pub(crate) fn branching_sample() -> AgentProgram {
        parse_program(
            "belief start.
             action act run_once feedback { 1: ; }.
             plan p1: +start : true <- act.
             plan p2: +start : true <- act.
             plan q1: +x : true <- act.
             plan q2: +x : true <- act.
             plan q3: +y : true <- act.
             outcomes p1 { 0.7: x; 0.3: y; }.
             outcomes p2 { 0.4: y; 0.6: z; }.
             outcomes q1 { 1: goal; }.
             outcomes q2 { 0.5: goal; 0.5: ; }.
             outcomes q3 { 0.2: goal; 0.8: ; }.",
        )
        .unwrap()
    }

    fn start() -> (BTreeSet<Predicate>, EventSet) {
        let s: BTreeSet<Predicate> = [Predicate::atom("start")].into();
        (s.clone(), s)
    }

    #[test]
    fn horizon_one_single_plan() {
        let prog = parse_program(
            "belief start. action a run_once feedback { 1: ; }.
             plan p: +start : true <- a. outcomes p { 0.7: ok; 0.3: bad; }.",
        )
        .unwrap();
        let (b, e) = start();
        let t = build_tree(&prog, &ImplicationTable::from_program(&prog), &b, &e, 1).unwrap();
        assert_eq!(t.nodes.len(), 4);
        assert_eq!(t.nodes.iter().filter(|n| n.is_leaf()).count(), 2);
    }

    #[test]
    fn branching_shape_matches_hand_count() {
        let prog = branching_sample();
        let (b, e) = start();
        let t = build_tree(&prog, &ImplicationTable::from_program(&prog), &b, &e, 2).unwrap();
        assert_eq!(t.root_plans(), vec![0, 1]);
        // p1: x -> {q1, q2}, y -> {q3}; p2: y -> {q3}, z -> dead end.
        let plan_nodes = t.nodes.iter().filter(|n| n.plan().is_some()).count();
        assert_eq!(plan_nodes, 2 + 3 + 1);
        assert_eq!(t.policy_count(), 2 * 2);
        let branches = t.branches(&|n| t.nodes[n].children.first().map(|&(c, _)| t.nodes[c].plan().unwrap()));
        let total: f64 = branches.iter().map(|b| b.likelihood).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_implication_is_a_completeness_error() {
        let prog = branching_sample();
        let (b, e) = start();
        let mut table = ImplicationTable::from_program(&prog);
        table.entries.remove(&1);
        let err = build_tree(&prog, &table, &b, &e, 1).unwrap_err();
        assert!(matches!(err, SelectError::Incomplete(ref p) if p == "p2"));
    }
}
