//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero on
//! any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use lisa_core::agent::AgentState;
use lisa_core::dsl::{parse_program, parse_source, print_program, validate};
use lisa_core::dtmc::{
    build_dtmc_from_agent, check_query, most_probable_paths, query_values, reach_prob_linear, reach_prob_vi,
    Backend, ReachQuery, DEFAULT_STATE_LIMIT,
};
use lisa_core::prism::{elaborate, export_prism, parse_prism, ElaborateOptions};
use lisa_core::select::{brute_force_rewards, build_tree, compute_rewards, select_plan, TreeNode};
use lisa_core::sim::{monte_carlo, run_sim, CounterSampler, EnvModel, StreamSampler};
use lisa_core::{DtmcModel, ImplicationTable, Predicate, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SURVEY: &str = include_str!("../fixtures/survey.pm");
const ASV: &str = include_str!("../fixtures/asv.lisa");
const ASV_ENV: &str = include_str!("../fixtures/asv_env.toml");
const SEED42: &str = include_str!("../fixtures/asv_seed42.jsonl");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn survey() -> DtmcModel {
    elaborate(&parse_prism(SURVEY).unwrap(), &ElaborateOptions::default()).unwrap()
}

fn survey_with(consts: &[(&str, f64)]) -> DtmcModel {
    let constants = consts.iter().map(|&(k, v)| (k.to_string(), Value::Double(v))).collect();
    elaborate(&parse_prism(SURVEY).unwrap(), &ElaborateOptions { constants, ..Default::default() }).unwrap()
}

fn query(text: &str) -> ReachQuery {
    ReachQuery::parse(text).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Default Pa, Pb, Pi, Ps.
const PROBS: [f64; 4] = [0.1, 0.1, 0.5, 0.6];

// Valuation order (s, a1, b1, oil, t, w1, w2) for the hand-written oracle.
type Grid = [i64; 7];

/// Successors of the two-area model, written directly from the command
/// list: unlabelled initial choice, weather (tick1) and decision (tick2).
fn grid_successors(v: Grid, (na, nb): (i64, i64), [pa, pb, pi, ps]: [f64; 4]) -> Vec<(Grid, f64)> {
    let [s, a1, b1, oil, t, w1, w2] = v;
    let with = |s2: i64, a: i64, b: i64, o: i64| [s2, a, b, o, 1, w1, w2];
    let mut out = Vec::new();
    if s == 0 && a1 == 0 && oil > 0 {
        out.push(([1, a1, b1, oil - 1, t, w1, w2], pi));
        out.push(([2, a1, b1, oil - 1, t, w1, w2], 1.0 - pi));
        return out;
    }
    if !(s == 1 || s == 2) {
        return out;
    }
    if t == 1 {
        for (x1, p1) in [(1, pa), (0, 1.0 - pa)] {
            for (x2, p2) in [(1, pb), (0, 1.0 - pb)] {
                out.push(([s, a1, b1, oil, 0, x1, x2], p1 * p2));
            }
        }
        return out;
    }
    let robot: Vec<(Grid, f64)> = if s == 1 {
        if a1 < na && oil > 0 && w1 == 0 {
            vec![(with(1, a1 + 1, b1, oil - 1), 1.0)]
        } else if a1 == na && b1 < nb && oil > 0 {
            vec![(with(2, a1, b1, oil - 1), 1.0)]
        } else if a1 < na && b1 < nb && oil > 1 && w1 == 1 && w2 == 1 {
            vec![(with(1, a1 + 1, b1, oil - 2), 1.0)]
        } else if a1 < na && b1 < nb && oil > 1 && w1 == 1 && w2 == 0 {
            vec![(with(1, a1 + 1, b1, oil - 2), ps), (with(2, a1, b1, oil - 1), 1.0 - ps)]
        } else if oil == 0 {
            vec![(with(3, a1, b1, oil), 1.0)]
        } else {
            vec![]
        }
    } else if b1 < nb && oil > 0 && w2 == 0 {
        vec![(with(2, a1, b1 + 1, oil - 1), 1.0)]
    } else if b1 == nb && a1 < na && oil > 0 {
        vec![(with(1, a1, b1, oil - 1), 1.0)]
    } else if b1 < nb && a1 < na && oil > 1 && w2 == 1 && w1 == 1 {
        vec![(with(2, a1, b1 + 1, oil - 2), 1.0)]
    } else if b1 < nb && a1 < na && oil > 1 && w2 == 1 && w1 == 0 {
        vec![(with(2, a1, b1 + 1, oil - 2), ps), (with(2, a1, b1, oil - 1), 1.0 - ps)]
    } else if oil == 0 {
        vec![(with(3, a1, b1, oil), 1.0)]
    } else {
        vec![]
    };
    out.extend(robot);
    out
}

fn criterion1() -> Outcome {
    parse_prism(SURVEY).map_err(|e| format!("parse: {e}"))?;
    let strict = ElaborateOptions { uniform_nondeterminism: false, ..Default::default() };
    let m = elaborate(&parse_prism(SURVEY).unwrap(), &strict).map_err(|e| format!("elaborate: {e}"))?;

    let (no, na, nb) = (15i64, 5i64, 5i64);
    let dims = [4, na + 1, nb + 1, no + 1, 2, 2, 2];
    let size: i64 = dims.iter().product();
    let encode = |v: &Grid| v.iter().zip(&dims).fold(0i64, |acc, (x, d)| acc * d + x) as usize;
    let decode = |mut i: i64| {
        let mut v = [0i64; 7];
        for k in (0..7).rev() {
            v[k] = i % dims[k];
            i /= dims[k];
        }
        v
    };
    // Reachability by sweeping the whole grid until nothing changes.
    let mut reached = vec![false; size as usize];
    reached[encode(&[0, 0, 0, no, 1, 0, 0])] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..size {
            if !reached[i as usize] {
                continue;
            }
            for (w, p) in grid_successors(decode(i), (na, nb), PROBS) {
                if p > 0.0 && !reached[encode(&w)] {
                    reached[encode(&w)] = true;
                    changed = true;
                }
            }
        }
    }
    let oracle = reached.iter().filter(|&&r| r).count();
    ensure(oracle == m.num_states(), || format!("{} states, oracle {oracle}", m.num_states()))?;

    let slot: Vec<usize> =
        ["s", "a1", "b1", "oil", "t", "w1", "w2"].iter().map(|v| m.var_index(v).unwrap()).collect();
    let grid_of = |s: usize| -> Grid { std::array::from_fn(|k| m.states[s].valuation[slot[k]]) };
    let index: HashMap<Grid, usize> = (0..m.num_states()).map(|s| (grid_of(s), s)).collect();
    for s in 0..m.num_states() {
        let v = grid_of(s);
        ensure(reached[encode(&v)], || format!("state {v:?} not reachable in the oracle"))?;
        let mut expect: BTreeMap<usize, f64> = BTreeMap::new();
        let succ = grid_successors(v, (na, nb), PROBS);
        if succ.is_empty() {
            expect.insert(s, 1.0);
        }
        for (w, p) in succ {
            *expect.entry(index[&w]).or_default() += p;
        }
        let got: BTreeMap<usize, f64> = m.rows[s].iter().copied().collect();
        ensure(
            got.len() == expect.len() && got.iter().all(|(t, p)| (p - expect.get(t).unwrap_or(&-1.0)).abs() < 1e-12),
            || format!("row of {v:?} differs"),
        )?;
    }
    Ok(format!("{oracle} reachable states, rows identical"))
}

fn criterion2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut models = vec![(survey(), None)];
    for _ in 0..100 {
        let n = rand::Rng::random_range(&mut rng, 2..=200);
        let m = common::random_dtmc(&mut rng, n, 4, 0.05);
        let t = common::random_target(&mut rng, n, 0.05);
        models.push((m, Some(t)));
    }
    let mut worst = 0.0f64;
    for (m, t) in &models {
        let target = match t {
            Some(t) => t.clone(),
            None => m.states_where(&query(MISSION).target).unwrap(),
        };
        let lin = reach_prob_linear(m, &target).map_err(|e| e.to_string())?;
        let vi = reach_prob_vi(m, &target, 1e-8).map_err(|e| e.to_string())?;
        worst = lin.iter().zip(&vi).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    ensure(worst < 1e-6, || format!("max difference {worst:e}"))?;
    Ok(format!("{} models, max |linear - vi| = {worst:.2e}", models.len()))
}

const MISSION: &str = "P=? [ F a1=Na & b1=Nb ]";

fn criterion3() -> Outcome {
    let m = survey();
    let q = query(MISSION);
    let exact = check_query(&m, &q, Backend::Linear).map_err(|e| e.to_string())?;
    let est = monte_carlo(&m, &q, 100_000, 2024).map_err(|e| e.to_string())?;
    let tol = est.half_width.max(0.01);
    let diff = (est.estimate - exact).abs();
    ensure(diff <= tol, || format!("estimate {} vs {exact}", est.estimate))?;
    Ok(format!("exact {exact:.6}, estimate {:.6} +/- {:.4}", est.estimate, est.half_width))
}

/// Best path to the first target hit among all paths of at most `max_len`
/// transitions: highest probability, then fewer transitions, then
/// lexicographically smallest.
fn exhaustive_best(m: &DtmcModel, target: &[bool], max_len: usize) -> Option<(f64, Vec<usize>)> {
    fn walk(
        m: &DtmcModel,
        target: &[bool],
        max_len: usize,
        path: &mut Vec<usize>,
        p: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let s = *path.last().unwrap();
        if target[s] {
            let better = match best {
                None => true,
                Some((bp, bpath)) => p > *bp || (p == *bp && (path.len(), &*path) < (bpath.len(), bpath)),
            };
            if better {
                *best = Some((p, path.clone()));
            }
            return;
        }
        if path.len() > max_len {
            return;
        }
        for &(t, q) in &m.rows[s] {
            path.push(t);
            walk(m, target, max_len, path, p * q, best);
            path.pop();
        }
    }
    let mut best = None;
    walk(m, target, max_len, &mut vec![m.initial], 1.0, &mut best);
    best
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut compared, mut longer) = (0, 0);
    for i in 0..50 {
        let n = rand::Rng::random_range(&mut rng, 2..=20);
        let m = common::random_dtmc(&mut rng, n, 3, 0.1);
        let target = common::random_target(&mut rng, n, 0.15);
        let top = most_probable_paths(&m, &target, 1);
        let oracle = exhaustive_best(&m, &target, 12);
        match (top.first(), oracle) {
            (None, None) => {}
            (Some(p), Some((op, opath))) => {
                let product: f64 = p.states.windows(2).map(|w| m.rows[w[0]].iter().find(|e| e.0 == w[1]).unwrap().1).product();
                ensure((product - p.probability).abs() < 1e-12, || format!("model {i}: reported probability"))?;
                if p.states.len() - 1 <= 12 {
                    ensure(p.states == opath && (p.probability - op).abs() < 1e-12, || {
                        format!("model {i}: {:?} ({}) vs oracle {opath:?} ({op})", p.states, p.probability)
                    })?;
                    compared += 1;
                } else {
                    ensure(p.probability >= op - 1e-12, || format!("model {i}: long path is worse"))?;
                    longer += 1;
                }
            }
            (Some(p), None) => {
                ensure(p.states.len() - 1 > 12, || format!("model {i}: oracle found no path"))?;
                longer += 1;
            }
            (None, Some(_)) => return Err(format!("model {i}: no path reported")),
        }
    }
    Ok(format!("50 models, {compared} matched exactly, {longer} with optimum beyond 12 steps"))
}

fn criterion5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sampler = StreamSampler(ChaCha8Rng::seed_from_u64(55));
    let (mut stat, mut df, mut programs, mut states) = (0.0, 0usize, 0, 0);
    while programs < 20 {
        let (src, env_text) = common::random_agent(&mut rng, 6);
        let prog = parse_program(&src).map_err(|d| format!("generated program: {}\n{src}", d[0]))?;
        let env = if env_text.is_empty() { EnvModel::default() } else { EnvModel::from_toml(&env_text).unwrap() };
        let built = build_dtmc_from_agent(&prog, &env, None, 5_000).map_err(|e| e.to_string())?;
        if built.model.num_states() > 120 {
            continue;
        }
        programs += 1;
        let m = &built.model;
        for (s, row) in m.rows.iter().enumerate() {
            let sum: f64 = row.iter().map(|e| e.1).sum();
            ensure((sum - 1.0).abs() <= 1e-9, || format!("row {s} sums to {sum}"))?;
        }
        let index: HashMap<&AgentState, usize> = built.configs.iter().enumerate().map(|(i, c)| (c, i)).collect();
        for (s, cfg) in built.configs.iter().enumerate() {
            let row = &m.rows[s];
            if m.deadlocks.contains(&s) {
                continue;
            }
            states += 1;
            let samples = if row.len() == 1 { 200 } else { 10_000 };
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            for c in 0..samples {
                let next = cfg.step_cycle(&prog, &env, &mut sampler, c + 1).map_err(|e| e.to_string())?.state;
                let t = *index.get(&next).ok_or("sampled a configuration outside the model")?;
                *counts.entry(t).or_default() += 1;
            }
            for t in counts.keys() {
                ensure(row.iter().any(|e| e.0 == *t), || format!("state {s}: sampled successor {t} not in row"))?;
            }
            if row.len() > 1 {
                df += row.len() - 1;
                for &(t, p) in row {
                    let e = p * samples as f64;
                    let o = *counts.get(&t).unwrap_or(&0) as f64;
                    stat += (o - e) * (o - e) / e;
                }
            }
        }
    }
    if df == 0 {
        return Ok(format!("{programs} programs, all transitions deterministic"));
    }
    let critical = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.99);
    ensure(stat <= critical, || format!("chi-square {stat:.1} > {critical:.1} (df {df})"))?;
    Ok(format!("{programs} programs, {states} states sampled, chi-square {stat:.1} <= {critical:.1} (df {df})"))
}

fn criterion6() -> Outcome {
    let prog = parse_program(ASV).map_err(|d| d[0].to_string())?;
    let env = EnvModel::from_toml(ASV_ENV).map_err(|e| e.to_string())?;
    let agent = build_dtmc_from_agent(&prog, &env, None, DEFAULT_STATE_LIMIT).map_err(|e| e.to_string())?.model;
    let prism = survey();
    let pairs = [
        ("mission", "P=? [ F \"blocks(a,5)\" & \"blocks(b,5)\" ]", MISSION),
        ("abort", "P=? [ F \"aborted\" ]", "P=? [ F s=3 ]"),
    ];
    let mut report = Vec::new();
    for (name, qa, qp) in pairs {
        let a = check_query(&agent, &query(qa), Backend::Linear).map_err(|e| e.to_string())?;
        let p = check_query(&prism, &query(qp), Backend::Linear).map_err(|e| e.to_string())?;
        ensure((a - p).abs() < 1e-6, || format!("{name}: agent {a} vs prism {p}"))?;
        report.push(format!("{name} {a:.6}"));
    }
    Ok(format!("{} agent states vs {} prism states; {}", agent.num_states(), prism.num_states(), report.join(", ")))
}

/// Rewards of staying in area A and switching to area B from the decision
/// point (s=1, a1=0, oil=14, only A stormy) under the given constants,
/// with leaves valued by the mission probability of the state each plan
/// leads to.
fn decision_point(pa: f64, pb: f64) -> Result<(String, f64, f64), String> {
    let m = survey_with(&[("Pa", pa), ("Pb", pb)]);
    let values = query_values(&m, &query(MISSION), Backend::Linear).map_err(|e| e.to_string())?;
    let find = |expr: &str| {
        let marks = m.states_where(&lisa_core::prism::parse_expr(expr).unwrap()).unwrap();
        marks.iter().position(|&b| b).ok_or(format!("no state {expr}"))
    };
    let a2 = values[find("s=1 & a1=1 & b1=0 & oil=12 & t=1 & w1=1 & w2=0")?];
    let b1 = values[find("s=2 & a1=0 & b1=0 & oil=13 & t=1 & w1=1 & w2=0")?];
    let prog = parse_program(
        "belief weather_report. action act run_once feedback { 1: ; }.
         plan stay: +weather_report : true <- act.
         plan switch: +weather_report : true <- act.
         outcomes stay { 1: in_a2; }.
         outcomes switch { 1: in_b1; }.",
    )
    .unwrap();
    let b: BTreeSet<Predicate> = [Predicate::atom("weather_report")].into();
    let goal: BTreeSet<Predicate> = [Predicate::atom("mission")].into();
    let tree = build_tree(&prog, &ImplicationTable::from_program(&prog), &b, &b, 1).map_err(|e| e.to_string())?;
    let valuer = |n: &TreeNode| {
        let beliefs = n.beliefs()?;
        if beliefs.contains(&Predicate::atom("in_a2")) {
            Some(a2)
        } else if beliefs.contains(&Predicate::atom("in_b1")) {
            Some(b1)
        } else {
            None
        }
    };
    let rewards = compute_rewards(&tree, &goal, Some(&valuer), 0);
    ensure((rewards.values[&0] - a2).abs() < 1e-12 && (rewards.values[&1] - b1).abs() < 1e-12, || {
        format!("rewards {:?} vs values {a2} / {b1}", rewards.values)
    })?;
    let chosen = select_plan(&tree.root_plans(), &rewards).ok_or("no plan selected")?;
    let expect = if b1 > a2 { 1 } else { 0 };
    ensure(chosen == expect, || format!("chose plan {chosen} with rewards {a2} / {b1}"))?;
    Ok((prog.plans[chosen].name.clone(), a2, b1))
}

fn criterion7() -> Outcome {
    let (base, a2, b1) = decision_point(0.1, 0.1)?;
    let grid = [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];
    let mut chosen = BTreeMap::new();
    for pa in grid {
        for pb in grid {
            let (plan, _, _) = decision_point(pa, pb)?;
            chosen.entry(plan).or_insert((pa, pb));
        }
    }
    ensure(chosen.len() == 2, || format!("selection never flipped: {chosen:?}"))?;
    let flips: Vec<String> = chosen.iter().map(|(p, (a, b))| format!("{p} at Pa={a} Pb={b}")).collect();
    Ok(format!("Pa=Pb=0.1: stay {a2:.6} / switch {b1:.6} -> {base}; grid of 49 agrees with argmax; {}", flips.join(", ")))
}

fn criterion8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut trees, mut worst, mut largest) = (0, 0.0f64, 0);
    let goal: BTreeSet<Predicate> = [Predicate::atom("g")].into();
    while trees < 100 {
        let src = common::random_select_program(&mut rng);
        let prog = parse_program(&src).map_err(|d| format!("{}\n{src}", d[0]))?;
        let horizon = rand::Rng::random_range(&mut rng, 1..=3);
        let start: BTreeSet<Predicate> = [Predicate::atom("start")].into();
        let tree = build_tree(&prog, &ImplicationTable::from_program(&prog), &start, &start, horizon)
            .map_err(|e| e.to_string())?;
        if tree.nodes.len() > 200 || tree.policy_count() > 4096 || tree.root_plans().is_empty() {
            continue;
        }
        trees += 1;
        largest = largest.max(tree.nodes.len());
        let dp = compute_rewards(&tree, &goal, None, 0);
        let bf = brute_force_rewards(&prog, &tree, &goal, None).map_err(|e| e.to_string())?;
        ensure(bf.len() == dp.values.len(), || "plan sets differ".into())?;
        for (p, v) in bf {
            worst = worst.max((v - dp.values[&p]).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max difference {worst:e}"))?;
    Ok(format!("100 trees (up to {largest} nodes), max difference {worst:.1e}"))
}

fn criterion9() -> Outcome {
    let prog = parse_program(ASV).map_err(|d| d[0].to_string())?;
    let env = EnvModel::from_toml(ASV_ENV).map_err(|e| e.to_string())?;
    let a = run_sim(&prog, &env, 42, 60).map_err(|e| e.to_string())?.to_jsonl();
    let b = lisa_core::agent::run_agent(&prog, &env, 60, &mut CounterSampler::new(42)).unwrap().to_jsonl();
    ensure(a == b && a == SEED42, || "seed-42 trace differs from the golden file".into())?;

    let printed = print_program(&prog);
    ensure(printed == ASV, || "canonical print of the scenario changed".into())?;
    let again = parse_source(&printed).map_err(|d| d[0].to_string())?;
    ensure(print_program(&again.program) == printed && again.program == prog, || "parse/print is not a fixpoint".into())?;
    ensure(validate(&again).is_empty(), || "scenario has warnings".into())?;

    let m = survey();
    let back = elaborate(&parse_prism(&export_prism(&m)).map_err(|e| e.to_string())?, &ElaborateOptions::default())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for q in [MISSION, "P=? [ F s=3 ]", "P=? [ F<=25 a1=Na ]", "P=? [ F b1=2 & oil<8 ]"] {
        let x = check_query(&m, &query(q), Backend::Linear).map_err(|e| e.to_string())?;
        let y = check_query(&back, &query(q), Backend::Linear).map_err(|e| e.to_string())?;
        worst = worst.max((x - y).abs());
    }
    ensure(worst <= 1e-9, || format!("export changed a query by {worst:e}"))?;
    Ok(format!("trace bit-identical, print fixpoint, export max difference {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("survey fidelity", criterion1, Duration::from_secs(5)),
        ("solver cross-agreement", criterion2, Duration::from_secs(30)),
        ("Monte Carlo concordance", criterion3, Duration::from_secs(20)),
        ("counterexample ordering", criterion4, Duration::from_secs(10)),
        ("agent abstraction is a DTMC", criterion5, Duration::MAX),
        ("dual-construction equivalence", criterion6, Duration::MAX),
        ("plan-selection correctness", criterion7, Duration::MAX),
        ("reward oracle", criterion8, Duration::MAX),
        ("determinism and round-trips", criterion9, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let result = match result {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS {} {name}: {msg} [{took:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} [{took:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
