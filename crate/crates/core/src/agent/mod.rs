//! The agent tuple: predicates, beliefs, rules, plans and actions, plus the
//! LISA reasoning cycle in [`cycle`].
//!
//! All predicates are ground. A predicate is a name with an ordered list of
//! constant atoms, e.g. `fuel(14)` or `at(a)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

mod cycle;

pub use cycle::{
    applicable_plans, apply_rules, brf_events, buf_update, run_agent, states_of, AgentState,
    Alternative, CycleRecord, Draw, Environment, FeedbackSource, Sampler, Silent, SourceKey,
    StepOutcome, Trace,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PredicateData {
    name: String,
    args: Vec<String>,
}

/// A ground predicate. Cloning is a reference-count bump.
///
/// Ordering is lexicographic on the name, then on the arguments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate(Arc<PredicateData>);

impl Predicate {
    pub fn new<S: Into<String>>(name: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Predicate(Arc::new(PredicateData {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }))
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Predicate::new::<String>(name, [])
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn args(&self) -> &[String] {
        &self.0.args
    }

    /// A PRISM-friendly variable name: `blocks(a,5)` becomes `blocks_a_5`.
    pub fn var_name(&self) -> String {
        let mut s = self.0.name.clone();
        for a in &self.0.args {
            s.push('_');
            s.push_str(a);
        }
        s
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)?;
        if !self.0.args.is_empty() {
            write!(f, "({})", self.0.args.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_atom(s: &str) -> bool {
    is_ident(s) || (!s.is_empty() && s.chars().all(|c| c.is_ascii_digit()))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed predicate `{0}`")]
pub struct PredicateParseError(pub String);

impl FromStr for Predicate {
    type Err = PredicateParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || PredicateParseError(s.to_string());
        match s.find('(') {
            None if is_ident(s) => Ok(Predicate::atom(s)),
            None => Err(err()),
            Some(open) => {
                let name = s[..open].trim();
                let rest = s[open + 1..].strip_suffix(')').ok_or_else(err)?;
                let args: Vec<&str> = rest.split(',').map(str::trim).collect();
                if !is_ident(name) || args.iter().any(|a| !is_atom(a)) {
                    return Err(err());
                }
                Ok(Predicate::new(name, args))
            }
        }
    }
}

impl Serialize for Predicate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where a belief came from. Percepts and feedbacks are non-persistent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Percept,
    MentalNote,
    ActionFeedback,
}

/// Current beliefs with their source tags. Keys are unique by construction.
pub type BeliefBase = BTreeMap<Predicate, Source>;

/// Predicates newly added in a cycle.
pub type EventSet = BTreeSet<Predicate>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub predicate: Predicate,
    pub positive: bool,
}

impl Literal {
    pub fn pos(p: Predicate) -> Self {
        Literal { predicate: p, positive: true }
    }

    pub fn neg(p: Predicate) -> Self {
        Literal { predicate: p, positive: false }
    }

    /// Negation is absence from the belief set.
    pub fn holds<F: Fn(&Predicate) -> bool>(&self, present: F) -> bool {
        present(&self.predicate) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.predicate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicRule {
    pub head: Predicate,
    pub body: Vec<Literal>,
}

/// An invocation in a plan body: `note(done)`, `forget(fuel(3))` or `explore`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionRef {
    pub name: String,
    pub arg: Option<Predicate>,
}

impl ActionRef {
    pub fn external(name: impl Into<String>) -> Self {
        ActionRef { name: name.into(), arg: None }
    }

    pub fn note(p: Predicate) -> Self {
        ActionRef { name: "note".into(), arg: Some(p) }
    }

    pub fn forget(p: Predicate) -> Self {
        ActionRef { name: "forget".into(), arg: Some(p) }
    }
}

impl fmt::Display for ActionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(p) => write!(f, "{}({})", self.name, p),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// Declaration index.
    pub id: usize,
    pub name: String,
    pub trigger: Predicate,
    /// Conjunction; empty means `true`.
    pub context: Vec<Literal>,
    pub body: Vec<ActionRef>,
}

impl Plan {
    pub fn context_holds(&self, beliefs: &BeliefBase) -> bool {
        self.context.iter().all(|l| l.holds(|p| beliefs.contains_key(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    InternalAdd,
    InternalRemove,
    RunOnce,
    RunRepeated,
}

impl ActionKind {
    pub fn is_external(self) -> bool {
        matches!(self, ActionKind::RunOnce | ActionKind::RunRepeated)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::InternalAdd => "internal_add",
            ActionKind::InternalRemove => "internal_remove",
            ActionKind::RunOnce => "run_once",
            ActionKind::RunRepeated => "run_repeated",
        }
    }
}

/// One alternative of a discrete distribution over predicate sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub predicates: BTreeSet<Predicate>,
    pub probability: f64,
}

impl Outcome {
    pub fn new(probability: f64, predicates: impl IntoIterator<Item = Predicate>) -> Self {
        Outcome { predicates: predicates.into_iter().collect(), probability }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionDef {
    pub name: String,
    pub kind: ActionKind,
    /// Feedback distribution; empty for internal kinds.
    pub feedback: Vec<Outcome>,
}

/// Internal actions every program can call without declaring them.
pub const BUILTIN_ACTIONS: [(&str, ActionKind); 3] = [
    ("note", ActionKind::InternalAdd),
    ("forget", ActionKind::InternalRemove),
    ("stop", ActionKind::InternalRemove),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntentionStatus {
    Ready,
    WaitingFeedback,
    Done,
    Failed,
}

/// A committed plan instance. At most one intention per plan is active, so
/// the plan id doubles as the intention id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Intention {
    pub plan: usize,
    pub pc: usize,
    pub status: IntentionStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(Predicate),
    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),
    #[error("invalid program: {0}")]
    Invalid(String),
}

/// A parsed LISA agent. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentProgram {
    /// Every predicate the program mentions.
    pub predicates: BTreeSet<Predicate>,
    pub initial_beliefs: BTreeSet<Predicate>,
    pub initial_actions: Vec<ActionRef>,
    pub rules: Vec<LogicRule>,
    pub plans: Vec<Plan>,
    /// User-declared actions, in declaration order. Builtins are implicit.
    pub actions: Vec<ActionDef>,
    pub percepts: BTreeSet<Predicate>,
    pub operational_states: BTreeSet<Predicate>,
    /// Implication table source: plan id to outcome distribution.
    pub outcomes: BTreeMap<usize, Vec<Outcome>>,
    trigger_index: BTreeMap<Predicate, Vec<usize>>,
}

/// Raw parts of a program before invariant checks.
#[derive(Debug, Clone, Default)]
pub struct ProgramParts {
    pub initial_beliefs: BTreeSet<Predicate>,
    pub initial_actions: Vec<ActionRef>,
    pub rules: Vec<LogicRule>,
    pub plans: Vec<Plan>,
    pub actions: Vec<ActionDef>,
    pub percepts: BTreeSet<Predicate>,
    pub operational_states: BTreeSet<Predicate>,
    pub outcomes: BTreeMap<usize, Vec<Outcome>>,
}

fn check_distribution(what: &str, outcomes: &[Outcome]) -> Result<(), AgentError> {
    if outcomes.iter().any(|o| !(0.0..=1.0).contains(&o.probability)) {
        return Err(AgentError::Invalid(format!("{what}: probability outside [0,1]")));
    }
    let sum: f64 = outcomes.iter().map(|o| o.probability).sum();
    if (sum - 1.0).abs() > crate::PROB_TOLERANCE {
        return Err(AgentError::Invalid(format!("{what}: probabilities sum {}", fmt_sum(sum))));
    }
    Ok(())
}

/// Formats a probability sum without float noise (`0.8999999999999999` -> `0.9`).
pub(crate) fn fmt_sum(sum: f64) -> String {
    let s = format!("{sum:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl AgentProgram {
    /// Builds a program, deriving the predicate set and checking invariants.
    pub fn new(parts: ProgramParts) -> Result<Self, AgentError> {
        let ProgramParts {
            initial_beliefs,
            initial_actions,
            rules,
            plans,
            actions,
            percepts,
            operational_states,
            outcomes,
        } = parts;

        let mut seen = BTreeSet::new();
        for a in &actions {
            if !seen.insert(a.name.as_str()) || BUILTIN_ACTIONS.iter().any(|(b, _)| *b == a.name) {
                return Err(AgentError::Invalid(format!("action `{}` declared twice", a.name)));
            }
            if a.kind.is_external() {
                check_distribution(&format!("feedback of `{}`", a.name), &a.feedback)?;
            } else if !a.feedback.is_empty() {
                return Err(AgentError::Invalid(format!(
                    "internal action `{}` cannot declare feedback",
                    a.name
                )));
            }
        }
        for (i, p) in plans.iter().enumerate() {
            if p.id != i {
                return Err(AgentError::Invalid(format!("plan `{}` has id {} at index {i}", p.name, p.id)));
            }
            if p.body.is_empty() {
                return Err(AgentError::Invalid(format!("plan `{}` has an empty body", p.name)));
            }
        }
        let mut names = BTreeSet::new();
        for p in &plans {
            if !names.insert(p.name.as_str()) {
                return Err(AgentError::Invalid(format!("duplicate plan id `{}`", p.name)));
            }
        }
        for r in &rules {
            if r.body.is_empty() {
                return Err(AgentError::Invalid(format!("rule for `{}` has an empty body", r.head)));
            }
            if actions.iter().any(|a| a.name == r.head.name()) {
                return Err(AgentError::Invalid(format!("rule head `{}` is an action", r.head)));
            }
        }
        for (plan, dist) in &outcomes {
            let name = plans.get(*plan).map(|p| p.name.as_str()).ok_or_else(|| {
                AgentError::Invalid(format!("outcomes for unknown plan index {plan}"))
            })?;
            check_distribution(&format!("outcomes of `{name}`"), dist)?;
        }
        for b in &initial_beliefs {
            if actions.iter().any(|a| a.name == b.name()) {
                return Err(AgentError::Invalid(format!("initial belief `{b}` names an action")));
            }
        }

        let mut program = AgentProgram {
            predicates: BTreeSet::new(),
            initial_beliefs,
            initial_actions,
            rules,
            plans,
            actions,
            percepts,
            operational_states,
            outcomes,
            trigger_index: BTreeMap::new(),
        };
        for call in program.initial_actions.iter().chain(program.plans.iter().flat_map(|p| &p.body)) {
            program.resolve_call(call)?;
        }

        let mut preds = BTreeSet::new();
        preds.extend(program.initial_beliefs.iter().cloned());
        preds.extend(program.percepts.iter().cloned());
        preds.extend(program.operational_states.iter().cloned());
        for r in &program.rules {
            preds.insert(r.head.clone());
            preds.extend(r.body.iter().map(|l| l.predicate.clone()));
        }
        for p in &program.plans {
            preds.insert(p.trigger.clone());
            preds.extend(p.context.iter().map(|l| l.predicate.clone()));
        }
        for call in program.initial_actions.iter().chain(program.plans.iter().flat_map(|p| &p.body)) {
            if let (Some(arg), false) = (&call.arg, call.name == "stop") {
                preds.insert(arg.clone());
            }
        }
        for a in &program.actions {
            for o in &a.feedback {
                preds.extend(o.predicates.iter().cloned());
            }
        }
        for dist in program.outcomes.values() {
            for o in dist {
                preds.extend(o.predicates.iter().cloned());
            }
        }
        program.predicates = preds;

        for p in &program.plans {
            program.trigger_index.entry(p.trigger.clone()).or_default().push(p.id);
        }
        Ok(program)
    }

    /// Looks up an action by name, including the builtin internal actions.
    pub fn action_kind(&self, name: &str) -> Option<ActionKind> {
        self.actions
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.kind)
            .or_else(|| BUILTIN_ACTIONS.iter().find(|(b, _)| *b == name).map(|(_, k)| *k))
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub(crate) fn resolve_call(&self, call: &ActionRef) -> Result<ActionKind, AgentError> {
        let kind = self
            .action_kind(&call.name)
            .ok_or_else(|| AgentError::UndeclaredAction(call.name.clone()))?;
        match (kind.is_external(), &call.arg) {
            (true, Some(_)) => Err(AgentError::Invalid(format!("external action `{}` takes no argument", call.name))),
            (false, None) => Err(AgentError::Invalid(format!("internal action `{}` needs an argument", call.name))),
            (false, Some(arg)) if call.name == "stop" => match self.action_kind(arg.name()) {
                Some(ActionKind::RunRepeated) if arg.args().is_empty() => Ok(kind),
                _ => Err(AgentError::Invalid(format!("`stop` needs a run_repeated action, got `{arg}`"))),
            },
            _ => Ok(kind),
        }
    }

    pub fn plan_by_name(&self, name: &str) -> Option<&Plan> {
        self.plans.iter().find(|p| p.name == name)
    }

    /// Plans whose trigger is `p`, in declaration order.
    pub fn plans_triggered_by(&self, p: &Predicate) -> &[usize] {
        self.trigger_index.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_declared(&self, p: &Predicate) -> bool {
        self.predicates.contains(p)
    }
}
