//! LISA: a limited-instruction-set BDI agent runtime with a DTMC abstraction,
//! a PRISM-subset front end and runtime plan selection by probabilistic
//! reachability.
//!
//! The crate is organised by subsystem:
//!
//! - [`agent`]: the agent tuple and the deterministic reasoning cycle.
//! - [`dsl`]: the `.lisa` agent language (parser, validator, printer).
//! - [`dtmc`]: explicit-state Markov chains, reachability solvers,
//!   most-probable paths and the agent-to-DTMC builder.
//! - [`prism`]: the PRISM-language subset (parse, elaborate, export).
//! - [`select`]: course-of-plans trees, rewards and plan selection.
//! - [`sim`]: environments, seeded simulation, Monte Carlo and the ASV scenario.

pub mod agent;
pub mod dsl;
pub mod dtmc;
pub mod expr;
pub mod prism;
pub mod select;
pub mod sim;

pub use agent::{
    ActionDef, ActionKind, ActionRef, AgentProgram, AgentState, BeliefBase, CycleRecord,
    EventSet, Intention, IntentionStatus, Literal, LogicRule, Outcome, Plan, Predicate, Source,
    Trace,
};
pub use dsl::{Diagnostic, Severity};
pub use dtmc::{DtmcModel, ReachQuery, TracePath};
pub use expr::{Expr, Value};
pub use prism::PrismAst;
pub use select::{CoursePlanTree, ImplicationTable, RewardTable};
pub use sim::{EnvModel, ScenarioConfig};

/// Tolerance used for every "probabilities sum to one" check.
pub const PROB_TOLERANCE: f64 = 1e-9;
