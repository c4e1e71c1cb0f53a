//! The LISA reasoning cycle.
//!
//! One cycle is: belief update (percepts and action feedbacks) → rule
//! fixpoint → event generation → unblock intentions whose feedback arrived →
//! plan triggering → every ready intention advances one action → internal
//! effects applied in plan-id order.
//!
//! Randomness enters only through [`Draw`]s: the environment's percepts and
//! the feedback of external actions fired in the previous cycle. A cycle is a
//! deterministic function of the state and one choice per draw, which is what
//! lets the DTMC builder enumerate successors and the simulator sample them
//! through the same code path.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{
    ActionKind, ActionRef, AgentError, AgentProgram, BeliefBase, EventSet, Intention,
    IntentionStatus, LogicRule, Outcome, Predicate, Source,
};

/// Drops non-persistent entries and installs this cycle's percepts and
/// feedbacks. Mental notes are kept as they are.
pub fn buf_update(
    program: &AgentProgram,
    base: &BeliefBase,
    percepts: &BTreeSet<Predicate>,
    feedbacks: &BTreeSet<Predicate>,
) -> Result<BeliefBase, AgentError> {
    for p in percepts.iter().chain(feedbacks) {
        if !program.is_declared(p) {
            return Err(AgentError::UndeclaredPredicate(p.clone()));
        }
    }
    let mut next: BeliefBase = base
        .iter()
        .filter(|(_, s)| **s == Source::MentalNote)
        .map(|(p, s)| (p.clone(), *s))
        .collect();
    for p in percepts {
        next.entry(p.clone()).or_insert(Source::Percept);
    }
    for p in feedbacks {
        next.entry(p.clone()).or_insert(Source::ActionFeedback);
    }
    Ok(next)
}

/// `E_t = B_t \ B_{t-1}`, ignoring sources. Deleted beliefs raise no event.
pub fn brf_events<'a>(
    prev: impl IntoIterator<Item = &'a Predicate>,
    cur: &BeliefBase,
) -> EventSet {
    let prev: BTreeSet<&Predicate> = prev.into_iter().collect();
    cur.keys().filter(|p| !prev.contains(p)).cloned().collect()
}

/// Forward chaining to the least fixpoint. Each pass evaluates every rule
/// against the snapshot taken at the start of the pass, so negative literals
/// see a stable belief set within a pass. Derived predicates are mental notes.
pub fn apply_rules(base: &BeliefBase, rules: &[LogicRule]) -> BeliefBase {
    let mut current = base.clone();
    // Each productive pass adds at least one head, so |rules| + 1 passes suffice.
    for _ in 0..=rules.len() {
        let snapshot = current.clone();
        let mut changed = false;
        for r in rules {
            if snapshot.contains_key(&r.head) {
                continue;
            }
            if r.body.iter().all(|l| l.holds(|p| snapshot.contains_key(p))) {
                current.insert(r.head.clone(), Source::MentalNote);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    current
}

/// Plans triggered by some event whose context holds, in declaration order.
pub fn applicable_plans(program: &AgentProgram, events: &EventSet, base: &BeliefBase) -> Vec<usize> {
    let mut ids: Vec<usize> = events
        .iter()
        .flat_map(|e| program.plans_triggered_by(e).iter().copied())
        .filter(|&id| program.plans[id].context_holds(base))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Who fired a run-once action whose feedback is still outstanding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeedbackSource {
    /// Position in the initial action list.
    Init(usize),
    /// Plan (intention) id.
    Plan(usize),
}

/// Identity of a random source within a cycle. Samplers key on it so that
/// draws do not depend on evaluation order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceKey {
    Environment,
    Once(FeedbackSource, String),
    Repeated(String),
}

impl SourceKey {
    pub fn label(&self) -> String {
        match self {
            SourceKey::Environment => "env".to_string(),
            SourceKey::Once(FeedbackSource::Init(i), a) => format!("once:init{i}:{a}"),
            SourceKey::Once(FeedbackSource::Plan(p), a) => format!("once:plan{p}:{a}"),
            SourceKey::Repeated(a) => format!("rep:{a}"),
        }
    }
}

/// One alternative of a draw: the predicates that appear and, for the
/// environment, the next environment-chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative {
    pub predicates: BTreeSet<Predicate>,
    pub env_state: Option<usize>,
    pub probability: f64,
}

impl From<&Outcome> for Alternative {
    fn from(o: &Outcome) -> Self {
        Alternative { predicates: o.predicates.clone(), env_state: None, probability: o.probability }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub key: SourceKey,
    pub alternatives: Vec<Alternative>,
}

/// What the agent's surroundings contribute to a cycle.
pub trait Environment {
    fn initial_state(&self) -> Option<usize> {
        None
    }

    /// Joint distribution over (next env state, percept set). Empty when the
    /// environment contributes nothing.
    fn percepts(&self, _env_state: Option<usize>) -> Vec<Alternative> {
        Vec::new()
    }

    /// Feedback distribution of an external action.
    fn feedback(&self, program: &AgentProgram, action: &str) -> Vec<Alternative> {
        program
            .action(action)
            .map(|a| a.feedback.iter().map(Alternative::from).collect())
            .unwrap_or_default()
    }
}

/// An environment with no percepts that uses the program's own feedback
/// declarations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Silent;

impl Environment for Silent {}

/// Chooses one alternative per draw.
pub trait Sampler {
    fn choose(&mut self, cycle: u64, key: &SourceKey, weights: &[f64]) -> usize;
}

/// The agent's complete runtime configuration between two cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentState {
    pub beliefs: BeliefBase,
    /// Predicates of the belief set the previous cycle's events were computed
    /// from.
    pub prev: BTreeSet<Predicate>,
    /// Active intentions, ordered by plan id.
    pub intentions: Vec<Intention>,
    /// Run-once actions whose feedback arrives next cycle.
    pub pending: Vec<(FeedbackSource, String)>,
    /// Run-repeated actions emitting feedback every cycle.
    pub running: BTreeSet<String>,
    pub env_state: Option<usize>,
    /// Actions fired in the cycle that produced this state.
    pub fired: Vec<String>,
}

/// One line of a trace. Field order is part of the output format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub cycle: u64,
    pub beliefs: Vec<String>,
    pub events: Vec<String>,
    pub desires: Vec<String>,
    pub actions_fired: Vec<String>,
    pub operational_states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Trace {
    pub records: Vec<CycleRecord>,
}

impl Trace {
    /// Line-delimited JSON, one record per cycle.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: AgentState,
    pub record: CycleRecord,
}

fn strings<'a, T: ToString + 'a>(it: impl IntoIterator<Item = &'a T>) -> Vec<String> {
    it.into_iter().map(ToString::to_string).collect()
}

fn apply_effects(
    program: &AgentProgram,
    beliefs: &mut BeliefBase,
    running: &mut BTreeSet<String>,
    effects: &[ActionRef],
) {
    let mut added = BTreeSet::new();
    let mut removed = BTreeSet::new();
    for e in effects {
        let Some(arg) = &e.arg else { continue };
        if e.name == "stop" {
            running.remove(arg.name());
            continue;
        }
        match program.action_kind(&e.name) {
            Some(ActionKind::InternalAdd) => {
                if removed.contains(arg) {
                    log::warn!("conflicting internal actions on `{arg}` in one cycle; last write wins");
                }
                added.insert(arg.clone());
                beliefs.insert(arg.clone(), Source::MentalNote);
            }
            Some(ActionKind::InternalRemove) => {
                if added.contains(arg) {
                    log::warn!("conflicting internal actions on `{arg}` in one cycle; last write wins");
                }
                removed.insert(arg.clone());
                beliefs.remove(arg);
            }
            _ => {}
        }
    }
}

impl AgentState {
    /// Cycle 0: executes the initial actions and loads the initial beliefs.
    /// The loaded beliefs raise events in cycle 1.
    pub fn initial<E: Environment + ?Sized>(
        program: &AgentProgram,
        env: &E,
    ) -> Result<StepOutcome, AgentError> {
        let mut beliefs: BeliefBase =
            program.initial_beliefs.iter().map(|p| (p.clone(), Source::MentalNote)).collect();
        let mut running = BTreeSet::new();
        let mut pending = Vec::new();
        let mut effects = Vec::new();
        for (i, call) in program.initial_actions.iter().enumerate() {
            match program.resolve_call(call)? {
                ActionKind::RunOnce => pending.push((FeedbackSource::Init(i), call.name.clone())),
                ActionKind::RunRepeated => {
                    running.insert(call.name.clone());
                }
                _ => effects.push(call.clone()),
            }
        }
        apply_effects(program, &mut beliefs, &mut running, &effects);
        let record = CycleRecord {
            cycle: 0,
            beliefs: Vec::new(),
            events: Vec::new(),
            desires: Vec::new(),
            actions_fired: strings(&program.initial_actions),
            operational_states: Vec::new(),
        };
        let state = AgentState {
            beliefs,
            prev: BTreeSet::new(),
            intentions: Vec::new(),
            pending,
            running,
            env_state: env.initial_state(),
            fired: strings(&program.initial_actions),
        };
        Ok(StepOutcome { state, record })
    }

    /// Random sources this state will consume in its next cycle.
    pub fn draws<E: Environment + ?Sized>(&self, program: &AgentProgram, env: &E) -> Vec<Draw> {
        let mut draws = Vec::new();
        let env_alts = env.percepts(self.env_state);
        if !env_alts.is_empty() {
            draws.push(Draw { key: SourceKey::Environment, alternatives: env_alts });
        }
        for (owner, action) in &self.pending {
            draws.push(Draw {
                key: SourceKey::Once(owner.clone(), action.clone()),
                alternatives: env.feedback(program, action),
            });
        }
        for action in &self.running {
            draws.push(Draw {
                key: SourceKey::Repeated(action.clone()),
                alternatives: env.feedback(program, action),
            });
        }
        draws
    }

    /// Runs one cycle with a fixed choice for each draw (same order as
    /// [`AgentState::draws`]).
    pub fn step_with(
        &self,
        program: &AgentProgram,
        draws: &[Draw],
        choices: &[usize],
        cycle: u64,
    ) -> Result<StepOutcome, AgentError> {
        debug_assert_eq!(draws.len(), choices.len());
        let mut percepts = BTreeSet::new();
        let mut feedbacks = BTreeSet::new();
        let mut env_state = self.env_state;
        for (draw, &c) in draws.iter().zip(choices) {
            let alt = &draw.alternatives[c];
            match draw.key {
                SourceKey::Environment => {
                    percepts.extend(alt.predicates.iter().cloned());
                    if alt.env_state.is_some() {
                        env_state = alt.env_state;
                    }
                }
                _ => feedbacks.extend(alt.predicates.iter().cloned()),
            }
        }

        let updated = buf_update(program, &self.beliefs, &percepts, &feedbacks)?;
        let beliefs = apply_rules(&updated, &program.rules);
        let events = brf_events(&self.prev, &beliefs);

        let mut intentions: Vec<Intention> = Vec::with_capacity(self.intentions.len());
        for i in &self.intentions {
            let mut i = i.clone();
            if i.status == IntentionStatus::WaitingFeedback {
                i.pc += 1;
                i.status = if i.pc == program.plans[i.plan].body.len() {
                    IntentionStatus::Done
                } else {
                    IntentionStatus::Ready
                };
            }
            if i.status != IntentionStatus::Done {
                intentions.push(i);
            }
        }

        let desires = applicable_plans(program, &events, &beliefs);
        for &plan in &desires {
            if !intentions.iter().any(|i| i.plan == plan) {
                intentions.push(Intention { plan, pc: 0, status: IntentionStatus::Ready });
            }
        }
        intentions.sort();

        let mut effects = Vec::new();
        let mut fired = Vec::new();
        let mut pending = Vec::new();
        let mut running = self.running.clone();
        for i in intentions.iter_mut().filter(|i| i.status == IntentionStatus::Ready) {
            let body = &program.plans[i.plan].body;
            let call = &body[i.pc];
            fired.push(call.clone());
            match program.resolve_call(call)? {
                ActionKind::RunOnce => {
                    pending.push((FeedbackSource::Plan(i.plan), call.name.clone()));
                    i.status = IntentionStatus::WaitingFeedback;
                }
                ActionKind::RunRepeated => {
                    running.insert(call.name.clone());
                    i.status = IntentionStatus::WaitingFeedback;
                }
                _ => {
                    effects.push(call.clone());
                    i.pc += 1;
                    if i.pc == body.len() {
                        i.status = IntentionStatus::Done;
                    }
                }
            }
        }
        intentions.retain(|i| i.status != IntentionStatus::Done);

        let mut next_beliefs = beliefs.clone();
        apply_effects(program, &mut next_beliefs, &mut running, &effects);

        let record = CycleRecord {
            cycle,
            beliefs: strings(beliefs.keys()),
            events: strings(&events),
            desires: desires.iter().map(|&id| program.plans[id].name.clone()).collect(),
            actions_fired: strings(&fired),
            operational_states: strings(
                program.operational_states.iter().filter(|p| beliefs.contains_key(*p)),
            ),
        };
        let state = AgentState {
            beliefs: next_beliefs,
            prev: beliefs.into_keys().collect(),
            intentions,
            pending,
            running,
            env_state,
            fired: strings(&fired),
        };
        Ok(StepOutcome { state, record })
    }

    /// One cycle with draws resolved by `sampler`.
    pub fn step_cycle<E: Environment + ?Sized, S: Sampler + ?Sized>(
        &self,
        program: &AgentProgram,
        env: &E,
        sampler: &mut S,
        cycle: u64,
    ) -> Result<StepOutcome, AgentError> {
        let draws = self.draws(program, env);
        let choices: Vec<usize> = draws
            .iter()
            .map(|d| {
                let weights: Vec<f64> = d.alternatives.iter().map(|a| a.probability).collect();
                sampler.choose(cycle, &d.key, &weights)
            })
            .collect();
        self.step_with(program, &draws, &choices, cycle)
    }

    pub fn holds(&self, p: &Predicate) -> bool {
        self.beliefs.contains_key(p)
    }
}

/// Runs cycle 0 and then `horizon` cycles, recording each one.
pub fn run_agent<E: Environment + ?Sized, S: Sampler + ?Sized>(
    program: &AgentProgram,
    env: &E,
    horizon: u64,
    sampler: &mut S,
) -> Result<Trace, AgentError> {
    let StepOutcome { mut state, record } = AgentState::initial(program, env)?;
    let mut trace = Trace { records: vec![record] };
    for cycle in 1..=horizon {
        let out = state.step_cycle(program, env, sampler, cycle)?;
        trace.records.push(out.record);
        state = out.state;
    }
    Ok(trace)
}

/// Convenience for tests and callers that need per-cycle states.
pub fn states_of(
    program: &AgentProgram,
    env: &dyn Environment,
    horizon: u64,
    sampler: &mut dyn Sampler,
) -> Result<Vec<AgentState>, AgentError> {
    let mut states = vec![AgentState::initial(program, env)?.state];
    for cycle in 1..=horizon {
        let next = states.last().expect("nonempty").step_cycle(program, env, sampler, cycle)?.state;
        states.push(next);
    }
    Ok(states)
}
