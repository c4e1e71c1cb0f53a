//! Random model and program generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write;

use lisa_core::dtmc::StateInfo;
use lisa_core::DtmcModel;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Normalised random weights, each at least `floor` before normalisation.
pub fn weights<R: Rng>(rng: &mut R, k: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| floor + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// A random DTMC over one variable `s` with `n` states; each state is
/// absorbing with probability `absorbing` or has up to `branching`
/// successors.
pub fn random_dtmc<R: Rng>(rng: &mut R, n: usize, branching: usize, absorbing: f64) -> DtmcModel {
    let mut rows = Vec::with_capacity(n);
    let ids: Vec<usize> = (0..n).collect();
    for s in 0..n {
        if rng.random::<f64>() < absorbing {
            rows.push(vec![(s, 1.0)]);
            continue;
        }
        let k = rng.random_range(1..=branching.min(n));
        let succ: Vec<usize> = ids.choose_multiple(rng, k).copied().collect();
        let w = weights(rng, k, 0.05);
        rows.push(succ.into_iter().zip(w).collect());
    }
    let states = (0..n)
        .map(|i| StateInfo { valuation: vec![i as i64], labels: Default::default(), action: Some(format!("a{i}")) })
        .collect();
    DtmcModel::new(vec!["s".into()], states, 0, rows, BTreeMap::new()).expect("generated rows are stochastic")
}

/// Random non-empty target set, never containing the initial state.
pub fn random_target<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<bool> {
    let mut t: Vec<bool> = (0..n).map(|i| i != 0 && rng.random::<f64>() < density).collect();
    if !t.iter().any(|&b| b) && n > 1 {
        t[rng.random_range(1..n)] = true;
    }
    t
}

fn subset<R: Rng>(rng: &mut R, preds: &[String], max: usize) -> Vec<String> {
    let mut p = preds.to_vec();
    p.shuffle(rng);
    p.truncate(rng.random_range(0..=max));
    p.sort();
    p
}

fn distribution<R: Rng>(rng: &mut R, preds: &[String], k: usize, max_preds: usize) -> String {
    let w = weights(rng, k, 0.15);
    let mut s = String::new();
    for p in w {
        let _ = write!(s, "{p}: {}; ", subset(rng, preds, max_preds).join(", "));
    }
    s
}

/// A small agent with up to `max_preds` atoms, up to four plans, a run-once
/// and possibly a run-repeated action. Returns the DSL text and an env TOML
/// (possibly empty).
pub fn random_agent<R: Rng>(rng: &mut R, max_preds: usize) -> (String, String) {
    let n = rng.random_range(3..=max_preds);
    let preds: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let sensed = rng.random_bool(0.5);
    let mut watched = preds.clone();
    let mut src = String::new();
    if sensed {
        watched.push("seen".into());
        src.push_str("percept seen.\n");
    }
    for p in subset(rng, &preds, 2) {
        let _ = writeln!(src, "belief {p}.");
    }
    let k = rng.random_range(2..=3);
    let _ = writeln!(src, "action e0 run_once feedback {{ {}}}.", distribution(rng, &preds, k, 2));
    let repeated = rng.random_bool(0.4);
    if repeated {
        let _ = writeln!(src, "action e1 run_repeated feedback {{ {}}}.", distribution(rng, &preds, 2, 1));
    }
    let _ = writeln!(src, "init {}.", if repeated && rng.random_bool(0.5) { "e1" } else { "e0" });
    if rng.random_bool(0.3) {
        let _ = writeln!(src, "rule {} :- {}.", preds[n - 1], preds[0]);
    }
    for i in 0..rng.random_range(1..=4) {
        let trigger = watched.choose(rng).unwrap();
        let ctx = match rng.random_range(0..3) {
            0 => "true".to_string(),
            1 => watched.choose(rng).unwrap().clone(),
            _ => format!("not {}", watched.choose(rng).unwrap()),
        };
        let body: Vec<String> = (0..rng.random_range(1..=3))
            .map(|_| match rng.random_range(0..4) {
                0 => "e0".to_string(),
                1 => format!("note({})", preds.choose(rng).unwrap()),
                2 => format!("forget({})", preds.choose(rng).unwrap()),
                _ if repeated => "e1".to_string(),
                _ => "e0".to_string(),
            })
            .collect();
        let _ = writeln!(src, "plan q{i}: +{trigger} : {ctx} <- {}.", body.join("; "));
    }
    let mut env = String::new();
    if sensed {
        let w = weights(rng, 2, 0.2);
        let _ = write!(
            env,
            "[[percepts]]\nalternatives = [ {{ probability = {}, predicates = [\"seen\"] }}, {{ probability = {} }} ]\n",
            w[0], w[1]
        );
    }
    (src, env)
}

/// A program for course-of-plans trees: plans with outcome tables over a
/// few atoms plus the goal `g`, all applicable from `start`.
pub fn random_select_program<R: Rng>(rng: &mut R) -> String {
    let preds: Vec<String> = (0..4).map(|i| format!("p{i}")).collect();
    let mut with_goal = preds.clone();
    with_goal.push("g".into());
    let mut src = String::from("belief start.\naction act run_once feedback { 1: ; }.\n");
    let plans = rng.random_range(2..=5);
    for i in 0..plans {
        let trigger = if i < 2 { "start".to_string() } else { preds.choose(rng).unwrap().clone() };
        let ctx = match rng.random_range(0..3) {
            0 => "true".to_string(),
            1 => format!("not {}", preds.choose(rng).unwrap()),
            _ => "start".to_string(),
        };
        let _ = writeln!(src, "plan r{i}: +{trigger} : {ctx} <- act.");
    }
    for i in 0..plans {
        let k = rng.random_range(1..=3);
        let _ = writeln!(src, "outcomes r{i} {{ {}}}.", distribution(rng, &with_goal, k, 2));
    }
    src
}
