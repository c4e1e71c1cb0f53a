use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::sampler::{episode_seed, pick, CounterSampler};
use super::SimError;
use crate::agent::{run_agent, AgentProgram, AgentState, Environment, Predicate, Sampler, Trace};
use crate::dtmc::{DtmcModel, ReachQuery};
use crate::expr::Scope;

/// Episodes still running after this many steps count as misses.
pub const MAX_EPISODE_STEPS: u64 = 10_000;

/// 99% normal quantile.
const Z99: f64 = 2.576;

/// Simulated trace with draws keyed on (seed, cycle, source).
pub fn run_sim<E: Environment + ?Sized>(
    program: &AgentProgram,
    env: &E,
    seed: u64,
    horizon: u64,
) -> Result<Trace, SimError> {
    Ok(run_agent(program, env, horizon, &mut CounterSampler::new(seed))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub episodes: u64,
    pub hits: u64,
    /// Episodes cut off at the step cap.
    pub truncated: u64,
    pub estimate: f64,
    /// Half-width of the 99% normal-approximation interval.
    pub half_width: f64,
}

impl McEstimate {
    fn from_counts(episodes: u64, hits: u64, truncated: u64) -> Self {
        let p = if episodes == 0 { 0.0 } else { hits as f64 / episodes as f64 };
        let half_width = if episodes == 0 { 0.0 } else { Z99 * (p * (1.0 - p) / episodes as f64).sqrt() };
        McEstimate { episodes, hits, truncated, estimate: p, half_width }
    }

    pub fn contains(&self, p: f64) -> bool {
        (p - self.estimate).abs() <= self.half_width
    }
}

#[derive(Clone, Copy)]
enum End {
    Hit,
    Miss,
    Truncated,
}

fn tally(ends: impl Iterator<Item = End>, episodes: u64) -> McEstimate {
    let (mut hits, mut truncated) = (0, 0);
    for e in ends {
        match e {
            End::Hit => hits += 1,
            End::Truncated => truncated += 1,
            End::Miss => {}
        }
    }
    McEstimate::from_counts(episodes, hits, truncated)
}

/// Estimates a reachability query by sampling paths of `model`.
pub fn monte_carlo(model: &DtmcModel, query: &ReachQuery, episodes: u64, seed: u64) -> Result<McEstimate, SimError> {
    let target = model.states_where(&query.target)?;
    let cap = query.bound.unwrap_or(MAX_EPISODE_STEPS).min(MAX_EPISODE_STEPS);
    let weights: Vec<Vec<f64>> = model.rows.iter().map(|r| r.iter().map(|&(_, p)| p).collect()).collect();
    let ends: Vec<End> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(seed, i));
            let mut s = model.initial;
            for _ in 0..cap {
                if target[s] {
                    return End::Hit;
                }
                if model.is_absorbing(s) {
                    return End::Miss;
                }
                s = model.rows[s][pick(&weights[s], rng.random::<f64>())].0;
            }
            match (target[s], query.bound) {
                (true, _) => End::Hit,
                (false, Some(k)) if k <= MAX_EPISODE_STEPS => End::Miss,
                _ => End::Truncated,
            }
        })
        .collect();
    Ok(tally(ends.into_iter(), episodes))
}

/// Agent state as an expression scope: labels are belief display strings,
/// identifiers are 0/1 flags of predicates by their variable name.
struct BeliefScope<'a> {
    state: &'a AgentState,
    vars: &'a [Predicate],
    labels: &'a BTreeMap<String, Predicate>,
}

impl Scope for BeliefScope<'_> {
    fn var(&self, slot: usize) -> i64 {
        self.state.holds(&self.vars[slot]) as i64
    }

    fn has_label(&self, label: &str) -> bool {
        self.labels.get(label).is_some_and(|p| self.state.holds(p))
    }
}

/// Estimates a reachability query by simulating the agent itself, with
/// cycles as steps. A cycle with no draws that leaves the state unchanged
/// ends the episode.
pub fn monte_carlo_agent<E: Environment + Sync + ?Sized>(
    program: &AgentProgram,
    env: &E,
    query: &ReachQuery,
    episodes: u64,
    seed: u64,
) -> Result<McEstimate, SimError> {
    let vars: Vec<Predicate> = program.predicates.iter().cloned().collect();
    let target = query
        .target
        .resolve(&|name| vars.iter().position(|p| p.var_name() == name), &BTreeMap::new())?;
    let mut labels = BTreeMap::new();
    for l in query.target.labels() {
        let p: Predicate = l.parse().map_err(|_| SimError::Query(format!("label \"{l}\" is not a predicate")))?;
        labels.insert(l.to_string(), p);
    }
    let cap = query.bound.unwrap_or(MAX_EPISODE_STEPS).min(MAX_EPISODE_STEPS);
    let initial = AgentState::initial(program, env)?.state;
    let ends: Result<Vec<End>, SimError> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let mut sampler = CounterSampler::new(episode_seed(seed, i));
            let mut state = initial.clone();
            let hit = |s: &AgentState| target.eval_bool(&BeliefScope { state: s, vars: &vars, labels: &labels });
            for cycle in 1..=cap {
                if hit(&state)? {
                    return Ok(End::Hit);
                }
                let draws = state.draws(program, env);
                let choices: Vec<usize> = draws
                    .iter()
                    .map(|d| {
                        let w: Vec<f64> = d.alternatives.iter().map(|a| a.probability).collect();
                        sampler.choose(cycle, &d.key, &w)
                    })
                    .collect();
                let next = state.step_with(program, &draws, &choices, cycle)?.state;
                if draws.is_empty() && next == state {
                    return Ok(End::Miss);
                }
                state = next;
            }
            Ok(match (hit(&state)?, query.bound) {
                (true, _) => End::Hit,
                (false, Some(k)) if k <= MAX_EPISODE_STEPS => End::Miss,
                _ => End::Truncated,
            })
        })
        .collect();
    Ok(tally(ends?.into_iter(), episodes))
}
