use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lisa_core::dsl::parse_source;
use lisa_core::dtmc::{build_dtmc_from_agent, DtmcModel, ReachQuery, DEFAULT_STATE_LIMIT};
use lisa_core::prism::{elaborate, parse_prism, parse_query, ElaborateOptions};
use lisa_core::{AgentProgram, EnvModel, Value};

use crate::error::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn is_prism(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("pm" | "prism"))
}

pub fn program(path: &Path) -> Result<AgentProgram, CliError> {
    let text = read(path)?;
    let source = parse_source(&text).map_err(|d| CliError::diagnostics(path, &d))?;
    Ok(source.program)
}

pub fn env(path: Option<&Path>, program: &AgentProgram) -> Result<EnvModel, CliError> {
    let Some(path) = path else { return Ok(EnvModel::default()) };
    let env = EnvModel::from_toml(&read(path)?).map_err(|e| CliError::input(Some(path), e))?;
    env.check_against(program).map_err(|e| CliError::input(Some(path), e))?;
    Ok(env)
}

pub fn query(text: &str) -> Result<ReachQuery, CliError> {
    parse_query(text).map_err(|e| CliError::prism(None, &e))
}

/// `NAME=VALUE` with an integer, double or boolean value.
pub fn constant(text: &str) -> Result<(String, Value), String> {
    let (name, v) = text.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{text}`"))?;
    let v = v.trim();
    let value = if let Ok(i) = v.parse::<i64>() {
        Value::Int(i)
    } else if let Ok(d) = v.parse::<f64>() {
        Value::Double(d)
    } else if let Ok(b) = v.parse::<bool>() {
        Value::Bool(b)
    } else {
        return Err(format!("bad constant value `{v}`"));
    };
    Ok((name.trim().to_string(), value))
}

pub struct ModelOptions<'a> {
    pub env: Option<&'a Path>,
    pub constants: &'a [(String, Value)],
    pub uniform_nondet: bool,
}

/// Elaborates a PRISM file or abstracts an agent program into a DTMC.
pub fn model(path: &Path, opts: &ModelOptions) -> Result<DtmcModel, CliError> {
    if is_prism(path) {
        let ast = parse_prism(&read(path)?).map_err(|e| CliError::prism(Some(path), &e))?;
        let eo = ElaborateOptions {
            constants: opts.constants.iter().cloned().collect::<BTreeMap<_, _>>(),
            uniform_nondeterminism: opts.uniform_nondet,
            state_limit: DEFAULT_STATE_LIMIT,
        };
        elaborate(&ast, &eo).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
    } else {
        let program = program(path)?;
        let env = env(opts.env, &program)?;
        let built = build_dtmc_from_agent(&program, &env, None, DEFAULT_STATE_LIMIT).map_err(CliError::runtime)?;
        Ok(built.model)
    }
}

