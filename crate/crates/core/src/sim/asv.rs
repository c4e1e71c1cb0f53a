//! Autonomous surface vessel exploring two areas of blocks on a fuel
//! budget, with weather reported before every decision.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::env::{ActionHook, EnvModel, OutcomeSpec};
use super::SimError;
use crate::agent::{AgentProgram, Predicate};
use crate::dsl::parse_source;
use crate::dtmc::ReachQuery;
use crate::expr::Value;

/// Scenario parameters. Defaults match the bundled PRISM model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Blocks in area A.
    pub na: u32,
    /// Blocks in area B.
    pub nb: u32,
    /// Fuel units.
    pub no: u32,
    /// Bad-weather probability in area A.
    pub pa: f64,
    /// Bad-weather probability in area B; defaults to `pa`.
    pub pb: Option<f64>,
    /// Probability of heading to area A first.
    pub pi: f64,
    /// Probability of staying put when only the current area has bad weather.
    pub ps: f64,
    /// Passage-failure probability. When set, bad weather in the current area
    /// alone always triggers a switch attempt, which fails with probability
    /// `q` and costs one fuel unit either way; `ps` is unused.
    pub q: Option<f64>,
    /// In area B, a weather-forced switch keeps the vessel in B (as the
    /// bundled PRISM model does). Set to move it to A instead.
    pub corrected_switch: bool,
    /// Goal predicates in priority order.
    pub goals: Vec<Predicate>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            na: 5,
            nb: 5,
            no: 15,
            pa: 0.1,
            pb: None,
            pi: 0.5,
            ps: 0.6,
            q: None,
            corrected_switch: false,
            goals: vec![Predicate::atom("mission_complete"), Predicate::atom("home")],
        }
    }
}

/// A query on the agent model and its counterpart on the PRISM model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioQuery {
    pub name: &'static str,
    pub agent: ReachQuery,
    pub prism: ReachQuery,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub source: String,
    pub program: AgentProgram,
    pub env: EnvModel,
    pub queries: Vec<ScenarioQuery>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let c: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn pb(&self) -> f64 {
        self.pb.unwrap_or(self.pa)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.na < 1 || self.nb < 1 || self.no < 1 {
            return Err(SimError::Config("na, nb and no must be at least 1".into()));
        }
        let probs = [("pa", Some(self.pa)), ("pb", self.pb), ("pi", Some(self.pi)), ("ps", Some(self.ps)), ("q", self.q)];
        for (name, p) in probs {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(SimError::Config(format!("{name} = {p} outside [0,1]")));
                }
            }
        }
        Ok(())
    }

    /// Constant overrides for the PRISM model.
    pub fn prism_constants(&self) -> BTreeMap<String, Value> {
        let int = |v: u32| Value::Int(v as i64);
        BTreeMap::from([
            ("No".into(), int(self.no)),
            ("Na".into(), int(self.na)),
            ("Nb".into(), int(self.nb)),
            ("Pa".into(), Value::Double(self.pa)),
            ("Pb".into(), Value::Double(self.pb())),
            ("Pi".into(), Value::Double(self.pi)),
            ("Ps".into(), Value::Double(self.ps)),
        ])
    }
}

fn q(text: &str) -> ReachQuery {
    ReachQuery::parse(text).expect("scenario queries parse")
}

fn weather_components(c: &ScenarioConfig) -> Vec<Vec<OutcomeSpec>> {
    let spec = |p: f64, preds: &[&str]| OutcomeSpec {
        probability: p,
        predicates: preds.iter().map(|s| s.parse().expect("predicate")).collect(),
    };
    vec![
        vec![spec(1.0, &["weather_report"])],
        vec![spec(c.pa, &["bad(a)"]), spec(1.0 - c.pa, &[])],
        vec![spec(c.pb(), &["bad(b)"]), spec(1.0 - c.pb(), &[])],
    ]
}

fn switch_outcomes(c: &ScenarioConfig) -> [(f64, &'static str); 2] {
    match c.q {
        None => [(c.ps, "stay_course"), (1.0 - c.ps, "switch_area")],
        Some(q) => [(1.0 - q, "switch_area"), (q, "passage_failed")],
    }
}

/// Ground DSL text of the scenario agent.
pub fn scenario_source(c: &ScenarioConfig) -> String {
    let (pa, pb) = (c.pa, c.pb());
    let mut s = String::new();
    let mut w = |line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    w(format!("belief at(base). belief fuel({}). belief blocks(a,0). belief blocks(b,0).", c.no));
    w(format!("action choose_area run_once feedback {{ {}: go(a); {}: go(b); }}.", c.pi, 1.0 - c.pi));
    w(format!(
        "action check_weather run_once feedback {{ {}: weather_report, bad(a), bad(b); {}: weather_report, bad(a); \
         {}: weather_report, bad(b); {}: weather_report; }}.",
        pa * pb,
        pa * (1.0 - pb),
        (1.0 - pa) * pb,
        (1.0 - pa) * (1.0 - pb)
    ));
    let [(p1, o1), (p2, o2)] = switch_outcomes(c);
    w(format!("action weigh_switch run_once feedback {{ {p1}: {o1}; {p2}: {o2}; }}."));
    w("init choose_area.".into());
    w(format!("rule mission_complete :- blocks(a,{}) & blocks(b,{}).", c.na, c.nb));
    w("opstate mission_complete. opstate at(a). opstate at(b). opstate aborted. opstate home.".into());

    let fuel = |f: u32, by: u32| format!("forget(fuel({f})); note(fuel({}))", f - by);
    let go = |from: &str, to: &str| format!("forget(at({from})); note(at({to}))");
    let blocks = |x: &str, k: u32| format!("forget(blocks({x},{k})); note(blocks({x},{}))", k + 1);

    for f in 1..=c.no {
        for x in ["a", "b"] {
            w(format!(
                "plan move_{x}_{f}: +go({x}) : at(base) & fuel({f}) <- {}; {}; check_weather.",
                go("base", x),
                fuel(f, 1)
            ));
        }
    }
    for (x, y, nx, ny) in [("a", "b", c.na, c.nb), ("b", "a", c.nb, c.na)] {
        let here = format!("at({x})");
        let unfinished = format!("not blocks({y},{ny})");
        for f in 1..=c.no {
            for k in 0..nx {
                w(format!(
                    "plan cover_{x}_{k}_{f}: +weather_report : {here} & blocks({x},{k}) & fuel({f}) & not bad({x}) \
                     <- {}; {}; check_weather.",
                    blocks(x, k),
                    fuel(f, 1)
                ));
            }
            w(format!(
                "plan leave_{x}_{f}: +weather_report : {here} & blocks({x},{nx}) & {unfinished} & fuel({f}) \
                 <- {}; {}; check_weather.",
                go(x, y),
                fuel(f, 1)
            ));
            w(format!(
                "plan return_{x}_{f}: +weather_report : {here} & mission_complete & fuel({f}) \
                 <- {}; {}; note(home).",
                go(x, "base"),
                fuel(f, 1)
            ));
        }
        for f in 2..=c.no {
            for k in 0..nx {
                let ctx = format!("{here} & blocks({x},{k}) & {unfinished} & fuel({f}) & bad({x})");
                w(format!(
                    "plan push_{x}_{k}_{f}: +weather_report : {ctx} & bad({y}) <- {}; {}; check_weather.",
                    blocks(x, k),
                    fuel(f, 2)
                ));
                w(format!("plan weigh_{x}_{k}_{f}: +weather_report : {ctx} & not bad({y}) <- weigh_switch."));
                if c.q.is_none() {
                    w(format!(
                        "plan stay_{x}_{k}_{f}: +stay_course : {here} & blocks({x},{k}) & fuel({f}) \
                         <- {}; {}; check_weather.",
                        blocks(x, k),
                        fuel(f, 2)
                    ));
                }
            }
            let dest = if x == "b" && !c.corrected_switch && c.q.is_none() { x } else { y };
            let moves = if dest == x { fuel(f, 1) } else { format!("{}; {}", go(x, dest), fuel(f, 1)) };
            w(format!("plan switch_{x}_{f}: +switch_area : {here} & fuel({f}) <- {moves}; check_weather."));
            if c.q.is_some() {
                w(format!(
                    "plan blocked_{x}_{f}: +passage_failed : {here} & fuel({f}) <- {}; check_weather.",
                    fuel(f, 1)
                ));
            }
        }
        w(format!("plan abort_{x}: +weather_report : {here} & fuel(0) <- note(aborted)."));
    }
    s
}

/// Environment: weather is reported as three independent components.
pub fn scenario_env(c: &ScenarioConfig) -> EnvModel {
    let spec = |p: f64, pred: &str| OutcomeSpec { probability: p, predicates: vec![pred.parse().expect("predicate")] };
    let [(p1, o1), (p2, o2)] = switch_outcomes(c);
    EnvModel {
        chain: None,
        percepts: Vec::new(),
        hooks: vec![
            ActionHook { action: "check_weather".into(), components: weather_components(c) },
            ActionHook { action: "weigh_switch".into(), components: vec![vec![spec(p1, o1), spec(p2, o2)]] },
        ],
    }
}

pub fn scenario_queries(c: &ScenarioConfig) -> Vec<ScenarioQuery> {
    vec![
        ScenarioQuery {
            name: "mission",
            agent: q(&format!("P=? [ F \"blocks(a,{})\" & \"blocks(b,{})\" ]", c.na, c.nb)),
            prism: q("P=? [ F a1=Na & b1=Nb ]"),
        },
        ScenarioQuery { name: "abort", agent: q("P=? [ F \"aborted\" ]"), prism: q("P=? [ F s=3 ]") },
    ]
}

pub fn asv_scenario(config: &ScenarioConfig) -> Result<Scenario, SimError> {
    config.validate()?;
    let source = scenario_source(config);
    let program = parse_source(&source)
        .map_err(|d| SimError::Config(format!("generated program: {}", d[0])))?
        .program;
    let env = scenario_env(config);
    env.check_against(&program)?;
    Ok(Scenario { config: config.clone(), source, program, env, queries: scenario_queries(config) })
}
