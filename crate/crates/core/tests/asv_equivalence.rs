use std::time::Instant;

use lisa_core::dtmc::{build_dtmc_from_agent, check_query, Backend, DEFAULT_STATE_LIMIT};
use lisa_core::prism::{elaborate, parse_prism, ElaborateOptions};
use lisa_core::sim::{asv_scenario, ScenarioConfig};

const SURVEY: &str = include_str!("../fixtures/survey.pm");
const CORRECTED: &str = include_str!("../fixtures/survey_corrected.pm");

fn compare(config: ScenarioConfig, prism_text: &str) {
    let t = Instant::now();
    let sc = asv_scenario(&config).unwrap();
    let agent = build_dtmc_from_agent(&sc.program, &sc.env, None, DEFAULT_STATE_LIMIT).unwrap();
    let opts = ElaborateOptions { constants: config.prism_constants(), ..Default::default() };
    let prism = elaborate(&parse_prism(prism_text).unwrap(), &opts).unwrap();
    eprintln!("agent {} states, prism {} states, {:?}", agent.model.num_states(), prism.num_states(), t.elapsed());
    for q in &sc.queries {
        let a = check_query(&agent.model, &q.agent, Backend::Linear).unwrap();
        let p = check_query(&prism, &q.prism, Backend::Linear).unwrap();
        eprintln!("{}: agent {a} prism {p}", q.name);
        assert!((a - p).abs() < 1e-6, "{}: agent {a} vs prism {p}", q.name);
    }
}

#[test]
fn default_scenario_matches_prism_model() {
    compare(ScenarioConfig::default(), SURVEY);
}

#[test]
fn corrected_switch_matches_corrected_model() {
    compare(ScenarioConfig { corrected_switch: true, ..Default::default() }, CORRECTED);
}

#[test]
fn varied_constants_still_match() {
    let c = ScenarioConfig { na: 3, nb: 4, no: 10, pa: 0.3, pb: Some(0.15), pi: 0.7, ps: 0.4, ..Default::default() };
    compare(c, SURVEY);
}
