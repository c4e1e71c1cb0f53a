use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{ConstType, PrismAst, PrismError};
use crate::dtmc::{DtmcModel, StateInfo, DEFAULT_STATE_LIMIT};
use crate::expr::{Expr, Value};

#[derive(Debug, Clone, Default)]
pub struct ElaborateOptions {
    /// Values for constants, overriding any definition in the model.
    pub constants: BTreeMap<String, Value>,
    /// Resolve nondeterministic choices uniformly instead of failing.
    pub uniform_nondeterminism: bool,
    /// Defaults to [`DEFAULT_STATE_LIMIT`] when zero.
    pub state_limit: usize,
}

struct Var {
    lo: i64,
    hi: i64,
}

/// A resolved update: probability and `(slot, value)` assignments.
struct RUpdate {
    prob: Expr,
    assigns: Vec<(usize, Expr)>,
}

struct RCommand {
    module: usize,
    label: Option<String>,
    guard: Expr,
    updates: Vec<RUpdate>,
    line: usize,
}

type Dist = Vec<(Vec<i64>, f64)>;

fn located(line: usize, e: impl std::fmt::Display) -> PrismError {
    PrismError::at(line, 1, e.to_string())
}

fn eval_constants(ast: &PrismAst, overrides: &BTreeMap<String, Value>) -> Result<BTreeMap<String, Value>, PrismError> {
    let declared: BTreeSet<&str> = ast.constants.iter().map(|c| c.name.as_str()).collect();
    if let Some(extra) = overrides.keys().find(|k| !declared.contains(k.as_str())) {
        return Err(PrismError::plain(format!("unknown constant `{extra}`")));
    }
    let mut consts = BTreeMap::new();
    for c in &ast.constants {
        let v = match (overrides.get(&c.name), &c.value) {
            (Some(v), _) => *v,
            (None, Some(e)) => e.eval_const(&consts).map_err(|e| located(c.line, e))?,
            (None, None) => return Err(located(c.line, format!("constant `{}` has no value", c.name))),
        };
        let v = match (c.ty, v) {
            (ConstType::Int, Value::Int(_)) => v,
            (ConstType::Double, v) => Value::Double(v.as_f64().map_err(|e| located(c.line, e))?),
            (ConstType::Int, other) => {
                return Err(located(c.line, format!("constant `{}` is int but got {other}", c.name)))
            }
        };
        consts.insert(c.name.clone(), v);
    }
    Ok(consts)
}

/// Builds the explicit DTMC of a parsed model by breadth-first exploration
/// from the initial valuation.
pub fn elaborate(ast: &PrismAst, opts: &ElaborateOptions) -> Result<DtmcModel, PrismError> {
    let limit = if opts.state_limit == 0 { DEFAULT_STATE_LIMIT } else { opts.state_limit };
    let consts = eval_constants(ast, &opts.constants)?;

    let mut names: Vec<String> = Vec::new();
    let mut vars = Vec::new();
    let mut init = Vec::new();
    for m in &ast.modules {
        for v in &m.vars {
            if names.contains(&v.name) || consts.contains_key(&v.name) {
                return Err(located(v.line, format!("`{}` declared twice", v.name)));
            }
            let int = |e: &Expr| e.eval_const(&consts).and_then(Value::as_int).map_err(|e| located(v.line, e));
            let (lo, hi) = (int(&v.lo)?, int(&v.hi)?);
            let start = v.init.as_ref().map(int).transpose()?.unwrap_or(lo);
            if lo > hi || start < lo || start > hi {
                return Err(located(v.line, format!("`{}`: bad range or initial value", v.name)));
            }
            names.push(v.name.clone());
            vars.push(Var { lo, hi });
            init.push(start);
        }
    }
    let slot = |n: &str| names.iter().position(|x| x == n);

    let mut commands = Vec::new();
    let mut owners: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (mi, m) in ast.modules.iter().enumerate() {
        let own: BTreeSet<usize> = m.vars.iter().filter_map(|v| slot(&v.name)).collect();
        for c in &m.commands {
            let res = |e: &Expr| e.resolve(&slot, &consts).map_err(|e| located(c.line, e));
            let mut updates = Vec::new();
            for u in &c.updates {
                let mut assigns = Vec::new();
                for (name, e) in &u.assignments {
                    let s = slot(name).ok_or_else(|| located(c.line, format!("unknown variable `{name}`")))?;
                    if !own.contains(&s) {
                        return Err(located(c.line, format!("module `{}` cannot update `{name}`", m.name)));
                    }
                    assigns.push((s, res(e)?));
                }
                updates.push(RUpdate { prob: res(&u.probability)?, assigns });
            }
            if let Some(l) = &c.label {
                owners.entry(l.clone()).or_default().insert(mi);
            }
            commands.push(RCommand { module: mi, label: c.label.clone(), guard: res(&c.guard)?, updates, line: c.line });
        }
    }

    let apply = |c: &RCommand, state: &[i64]| -> Result<Dist, PrismError> {
        let mut dist = Vec::new();
        let mut total = 0.0;
        for u in &c.updates {
            let p = u.prob.eval(state).and_then(Value::as_f64).map_err(|e| located(c.line, e))?;
            total += p;
            let mut next = state.to_vec();
            for (s, e) in &u.assigns {
                next[*s] = e.eval(state).and_then(Value::as_int).map_err(|e| located(c.line, e))?;
            }
            dist.push((next, p));
        }
        if (total - 1.0).abs() > crate::PROB_TOLERANCE {
            return Err(located(c.line, format!("update probabilities sum to {total}")));
        }
        Ok(dist)
    };

    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut valuations = vec![init.clone()];
    index.insert(init, 0);
    let mut rows = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let state = valuations[s].clone();
        let mut choices: Vec<Dist> = Vec::new();
        let mut by_label: BTreeMap<&str, Vec<Vec<&RCommand>>> = BTreeMap::new();
        for (label, mods) in &owners {
            by_label.insert(label, vec![Vec::new(); mods.len()]);
        }
        for c in &commands {
            let on = c.guard.eval_bool(state.as_slice()).map_err(|e| located(c.line, e))?;
            if !on {
                continue;
            }
            match &c.label {
                None => choices.push(apply(c, &state)?),
                Some(l) => {
                    let k = owners[l].iter().position(|&m| m == c.module).expect("owner");
                    by_label.get_mut(l.as_str()).expect("label")[k].push(c);
                }
            }
        }
        for (_, per_module) in by_label {
            if per_module.iter().any(Vec::is_empty) {
                continue;
            }
            // Product over one enabled command per participating module.
            let mut combos: Vec<Dist> = vec![vec![(state.clone(), 1.0)]];
            for cmds in per_module {
                let mut next_combos = Vec::new();
                for partial in &combos {
                    for c in &cmds {
                        let d = apply(c, &state)?;
                        let mut joint = Vec::new();
                        for (pv, pp) in partial {
                            for (v, p) in &d {
                                let mut merged = pv.clone();
                                for (i, x) in v.iter().enumerate() {
                                    if *x != state[i] {
                                        merged[i] = *x;
                                    }
                                }
                                joint.push((merged, pp * p));
                            }
                        }
                        next_combos.push(joint);
                    }
                }
                combos = next_combos;
            }
            choices.extend(combos);
        }

        let row_dist: Dist = match choices.len() {
            0 => Vec::new(),
            1 => choices.pop().expect("one choice"),
            n if opts.uniform_nondeterminism => choices
                .into_iter()
                .flat_map(|d| d.into_iter().map(move |(v, p)| (v, p / n as f64)))
                .collect(),
            n => {
                let vals: Vec<String> = names.iter().zip(&state).map(|(a, b)| format!("{a}={b}")).collect();
                return Err(PrismError::plain(format!(
                    "nondeterminism: {n} commands enabled in state ({})",
                    vals.join(",")
                )));
            }
        };
        let mut row = Vec::new();
        for (v, p) in row_dist {
            if let Some(i) = v.iter().zip(&vars).position(|(x, r)| *x < r.lo || *x > r.hi) {
                let vals: Vec<String> = names.iter().zip(&state).map(|(a, b)| format!("{a}={b}")).collect();
                return Err(PrismError::plain(format!(
                    "`{}'={}` out of range [{}..{}] in state ({})",
                    names[i], v[i], vars[i].lo, vars[i].hi, vals.join(",")
                )));
            }
            let t = match index.get(&v) {
                Some(&t) => t,
                None => {
                    if valuations.len() >= limit {
                        return Err(PrismError::plain(format!("state space exceeds {limit} states")));
                    }
                    let t = valuations.len();
                    index.insert(v.clone(), t);
                    valuations.push(v);
                    queue.push_back(t);
                    t
                }
            };
            row.push((t, p));
        }
        if rows.len() <= s {
            rows.resize(s + 1, Vec::new());
        }
        rows[s] = row;
    }
    rows.resize(valuations.len(), Vec::new());

    let states = valuations
        .into_iter()
        .map(|valuation| StateInfo { valuation, labels: BTreeSet::new(), action: None })
        .collect();
    DtmcModel::new(names, states, 0, rows, consts).map_err(|e| PrismError::plain(e.to_string()))
}
