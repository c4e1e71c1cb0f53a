use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::agent::{AgentProgram, AgentState, Environment, Predicate};

use super::model::StateInfo;
use super::{DtmcError, DtmcModel};

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// A DTMC abstraction of an agent together with the configuration behind
/// each state.
#[derive(Debug, Clone)]
pub struct AgentDtmc {
    pub model: DtmcModel,
    pub configs: Vec<AgentState>,
    pub tracked: Vec<Predicate>,
}

/// Mixed-radix counter over the alternatives of each draw.
fn next_choice(choices: &mut [usize], sizes: &[usize]) -> bool {
    for (c, &n) in choices.iter_mut().zip(sizes).rev() {
        *c += 1;
        if *c < n {
            return true;
        }
        *c = 0;
    }
    false
}

/// Explores every configuration reachable from cycle 0. Each tracked
/// predicate (all of them when `tracked` is `None`) becomes a 0/1 variable;
/// `_env` holds the environment-chain state and `_cfg` separates
/// configurations that agree on the rest.
pub fn build_dtmc_from_agent<E: Environment + ?Sized>(
    program: &AgentProgram,
    env: &E,
    tracked: Option<&BTreeSet<Predicate>>,
    limit: usize,
) -> Result<AgentDtmc, DtmcError> {
    if let Some(p) = tracked.and_then(|t| t.iter().find(|p| !program.is_declared(p))) {
        return Err(DtmcError::Invalid(format!("tracked predicate `{p}` is not used by the program")));
    }
    let initial = AgentState::initial(program, env)?.state;
    let mut index: HashMap<AgentState, usize> = HashMap::new();
    let mut configs = vec![initial.clone()];
    index.insert(initial, 0);
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(s) = queue.pop_front() {
        let state = configs[s].clone();
        let draws = state.draws(program, env);
        let sizes: Vec<usize> = draws.iter().map(|d| d.alternatives.len()).collect();
        let mut row = Vec::new();
        if sizes.iter().all(|&n| n > 0) {
            let mut choices = vec![0usize; draws.len()];
            loop {
                let p: f64 = draws.iter().zip(&choices).map(|(d, &c)| d.alternatives[c].probability).product();
                if p > 0.0 {
                    let next = state.step_with(program, &draws, &choices, 0)?.state;
                    let t = match index.get(&next) {
                        Some(&t) => t,
                        None => {
                            if configs.len() >= limit {
                                return Err(DtmcError::StateLimit { limit, frontier: queue.len() + 1 });
                            }
                            let t = configs.len();
                            index.insert(next.clone(), t);
                            configs.push(next);
                            queue.push_back(t);
                            t
                        }
                    };
                    row.push((t, p));
                }
                if !next_choice(&mut choices, &sizes) {
                    break;
                }
            }
        }
        if rows.len() <= s {
            rows.resize(s + 1, Vec::new());
        }
        rows[s] = row;
    }
    rows.resize(configs.len(), Vec::new());

    let tracked: Vec<Predicate> = tracked.unwrap_or(&program.predicates).iter().cloned().collect();
    let has_env = configs.iter().any(|c| c.env_state.is_some());
    let mut vars: Vec<String> = tracked.iter().map(Predicate::var_name).collect();
    if has_env {
        vars.push("_env".into());
    }
    vars.push("_cfg".into());

    let mut seen: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    let states = configs
        .iter()
        .map(|c| {
            let mut valuation: Vec<i64> = tracked.iter().map(|p| i64::from(c.holds(p))).collect();
            if has_env {
                valuation.push(c.env_state.map_or(-1, |e| e as i64));
            }
            let k = seen.entry(valuation.clone()).or_insert(0);
            valuation.push(*k);
            *k += 1;
            let labels: BTreeSet<String> = c.beliefs.keys().map(ToString::to_string).collect();
            let action = (!c.fired.is_empty()).then(|| c.fired.join("; "));
            StateInfo { valuation, labels, action }
        })
        .collect();

    let model = DtmcModel::new(vars, states, 0, rows, BTreeMap::new())?;
    Ok(AgentDtmc { model, configs, tracked })
}
