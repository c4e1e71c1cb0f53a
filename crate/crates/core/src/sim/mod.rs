//! Seeded simulation, Monte Carlo estimation, environment models and the
//! ASV scenario.

use thiserror::Error;

use crate::agent::AgentError;
use crate::dtmc::DtmcError;
use crate::expr::EvalError;

mod asv;
mod env;
mod mc;
mod sampler;

pub use asv::{asv_scenario, scenario_env, scenario_queries, scenario_source, Scenario, ScenarioConfig, ScenarioQuery};
pub use env::{product, ActionHook, ChainEdge, EnvChain, EnvModel, OutcomeSpec, PerceptSource};
pub use mc::{monte_carlo, monte_carlo_agent, run_sim, McEstimate, MAX_EPISODE_STEPS};
pub use sampler::{episode_seed, pick, CounterSampler, StreamSampler};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("environment: {0}")]
    Env(String),
    #[error("scenario: {0}")]
    Config(String),
    #[error("query: {0}")]
    Query(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Dtmc(#[from] DtmcError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
