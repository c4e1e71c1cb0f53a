//! Explicit-state DTMCs: construction, reachability and most-probable paths.

use thiserror::Error;

use crate::agent::AgentError;
use crate::expr::EvalError;

mod build;
pub(crate) mod model;
mod paths;
mod query;
mod solve;

pub use build::{build_dtmc_from_agent, AgentDtmc, DEFAULT_STATE_LIMIT};
pub use model::{DtmcModel, StateInfo};
pub use paths::{most_probable_paths, TracePath};
pub use query::{check_query, query_values, ReachQuery};
pub use solve::{
    bounded_reach, prob01_precompute, reach_prob, reach_prob_linear, reach_prob_vi, Backend, VI_EPSILON,
};

#[derive(Debug, Error)]
pub enum DtmcError {
    #[error("state {state}: outgoing probabilities sum to {sum}")]
    NotStochastic { state: usize, sum: f64 },
    #[error("state space exceeds {limit} states ({frontier} states still unexplored)")]
    StateLimit { limit: usize, frontier: usize },
    #[error("solver did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("query: {0}")]
    Query(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}
