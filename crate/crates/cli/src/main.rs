use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lisa_core::dsl::{parse_source, print_program, validate, Severity};
use lisa_core::dtmc::{check_query, most_probable_paths, Backend, DtmcModel};
use lisa_core::prism::export_prism;
use lisa_core::select::select_at;
use lisa_core::sim::{asv_scenario, monte_carlo, monte_carlo_agent, run_sim};
use lisa_core::{ImplicationTable, Predicate, ScenarioConfig, Value};

mod error;
mod load;

use error::{diagnostic, CliError};
use load::ModelOptions;

#[derive(Parser)]
#[command(name = "lisa", version, about = "LISA agents, DTMC abstraction and probabilistic plan selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an agent program.
    Parse {
        file: PathBuf,
        /// Print the program in canonical form.
        #[arg(long)]
        print: bool,
    },
    /// Simulate an agent and emit its trace as JSON lines.
    Run {
        file: PathBuf,
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: u64,
        /// Write the trace here instead of standard output.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compute a reachability probability.
    Check {
        /// A `.pm` PRISM model or a `.lisa` agent program.
        file: PathBuf,
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "linear")]
        backend: Backend,
        /// Resolve overlapping commands uniformly instead of failing.
        #[arg(long)]
        uniform_nondet: bool,
        /// Override a model constant, e.g. `--const Pa=0.2`.
        #[arg(long = "const", value_parser = load::constant)]
        constants: Vec<(String, Value)>,
    },
    /// Most probable paths to the query target.
    Paths {
        file: PathBuf,
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long = "const", value_parser = load::constant)]
        constants: Vec<(String, Value)>,
        #[arg(long)]
        json: bool,
    },
    /// Score the triggered plans against a goal and pick one.
    Select {
        file: PathBuf,
        /// Goal predicate; repeat for a conjunction.
        #[arg(long, required = true)]
        goal: Vec<Predicate>,
        #[arg(long)]
        horizon: usize,
        /// Beliefs to score from instead of the initial ones.
        #[arg(long)]
        belief: Vec<Predicate>,
        #[arg(long)]
        json: bool,
    },
    /// Write the agent's DTMC (or an elaborated PRISM model) as a PRISM file.
    ExportPrism {
        file: PathBuf,
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Monte Carlo estimate of a reachability probability.
    Mc {
        file: PathBuf,
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        query: String,
        #[arg(short = 'n', long, default_value_t = 100_000)]
        episodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "const", value_parser = load::constant)]
        constants: Vec<(String, Value)>,
    },
    /// Generate the ASV scenario agent and environment.
    Asv {
        /// Scenario parameters (TOML); defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        agent: PathBuf,
        #[arg(long)]
        env: PathBuf,
    },
}

/// `x` with 10 significant digits.
fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (9 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn parse(file: PathBuf, print: bool) -> Result<(), CliError> {
    let text = load::read(&file)?;
    match parse_source(&text) {
        Ok(source) => {
            let warnings = validate(&source);
            for w in &warnings {
                println!("{}:{w}", file.display());
            }
            if print {
                print!("{}", print_program(&source.program));
            } else {
                let p = &source.program;
                println!(
                    "ok: {} plans, {} actions, {} rules, {} warnings",
                    p.plans.len(),
                    p.actions.len(),
                    p.rules.len(),
                    warnings.len()
                );
            }
            Ok(())
        }
        Err(diags) => {
            for d in &diags {
                println!("{}:{d}", file.display());
            }
            let errs: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).map(|d| diagnostic(&file, d)).collect();
            Err(CliError::Input(errs))
        }
    }
}

fn run(file: PathBuf, env: Option<PathBuf>, seed: u64, horizon: u64, trace: Option<PathBuf>) -> Result<(), CliError> {
    let program = load::program(&file)?;
    let env = load::env(env.as_deref(), &program)?;
    let t = run_sim(&program, &env, seed, horizon).map_err(CliError::runtime)?;
    match trace {
        Some(out) => load::write(&out, &t.to_jsonl()),
        None => {
            print!("{}", t.to_jsonl());
            Ok(())
        }
    }
}

fn target_of(model: &DtmcModel, query: &lisa_core::ReachQuery) -> Result<Vec<bool>, CliError> {
    model.states_where(&query.target).map_err(|e| CliError::input(None, e))
}

fn describe(model: &DtmcModel, s: usize) -> String {
    let st = &model.states[s];
    if !st.labels.is_empty() {
        let labels: Vec<&str> = st.labels.iter().map(String::as_str).collect();
        return format!("[{}]", labels.join(", "));
    }
    let vals: Vec<String> = model.vars.iter().zip(&st.valuation).map(|(v, x)| format!("{v}={x}")).collect();
    format!("{{{}}}", vals.join(","))
}

fn paths(file: PathBuf, opts: &ModelOptions, query: &str, count: usize, json: bool) -> Result<(), CliError> {
    let q = load::query(query)?;
    let model = load::model(&file, opts)?;
    let target = target_of(&model, &q)?;
    let found = most_probable_paths(&model, &target, count);
    if json {
        println!("{}", serde_json::to_string_pretty(&found).expect("paths serialise"));
        return Ok(());
    }
    if found.is_empty() {
        println!("no path reaches the target");
    }
    for (i, p) in found.iter().enumerate() {
        println!("path {} probability {}", i + 1, sig10(p.probability));
        for (j, &s) in p.states.iter().enumerate() {
            let via = p.actions[j].as_deref().map(|a| format!("  <- {a}")).unwrap_or_default();
            println!("  {s:>6} {}{via}", describe(&model, s));
        }
    }
    Ok(())
}

fn select(file: PathBuf, goal: Vec<Predicate>, horizon: usize, belief: Vec<Predicate>, json: bool) -> Result<(), CliError> {
    let program = load::program(&file)?;
    let beliefs: BTreeSet<Predicate> =
        if belief.is_empty() { program.initial_beliefs.clone() } else { belief.into_iter().collect() };
    let goal: BTreeSet<Predicate> = goal.into_iter().collect();
    let table = ImplicationTable::from_program(&program);
    let rec = select_at(&program, &table, &beliefs, &beliefs, &goal, horizon, None, 0).map_err(CliError::runtime)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&rec).expect("records serialise"));
        return Ok(());
    }
    println!("{:<24} reward", "plan");
    for d in &rec.desires {
        println!("{d:<24} {}", sig10(rec.rewards.get(d).copied().unwrap_or(0.0)));
    }
    println!("chosen: {}", rec.chosen.as_deref().unwrap_or("none"));
    if let (Some(r), Some(p)) = (&rec.recommended, rec.path_probability) {
        println!("most probable path starts with: {r} (probability {})", sig10(p));
    }
    Ok(())
}

fn run_command(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Parse { file, print } => parse(file, print),
        Command::Run { file, env, seed, horizon, trace } => run(file, env, seed, horizon, trace),
        Command::Check { file, env, query, backend, uniform_nondet, constants } => {
            let q = load::query(&query)?;
            let opts = ModelOptions { env: env.as_deref(), constants: &constants, uniform_nondet };
            let model = load::model(&file, &opts)?;
            target_of(&model, &q)?;
            let p = check_query(&model, &q, backend).map_err(CliError::runtime)?;
            println!("{}", sig10(p));
            Ok(())
        }
        Command::Paths { file, env, query, count, constants, json } => {
            let opts = ModelOptions { env: env.as_deref(), constants: &constants, uniform_nondet: false };
            paths(file, &opts, &query, count, json)
        }
        Command::Select { file, goal, horizon, belief, json } => select(file, goal, horizon, belief, json),
        Command::ExportPrism { file, env, output } => {
            let opts = ModelOptions { env: env.as_deref(), constants: &[], uniform_nondet: false };
            let model = load::model(&file, &opts)?;
            load::write(&output, &export_prism(&model))
        }
        Command::Mc { file, env, query, episodes, seed, constants } => {
            if episodes == 0 {
                return Err(CliError::input(None, "-n must be at least 1"));
            }
            let q = load::query(&query)?;
            let est = if load::is_prism(&file) {
                let opts = ModelOptions { env: None, constants: &constants, uniform_nondet: false };
                let model = load::model(&file, &opts)?;
                target_of(&model, &q)?;
                monte_carlo(&model, &q, episodes, seed)
            } else {
                let program = load::program(&file)?;
                let env = load::env(env.as_deref(), &program)?;
                monte_carlo_agent(&program, &env, &q, episodes, seed)
            }
            .map_err(CliError::runtime)?;
            println!("estimate {} +/- {} (99%, n={})", sig10(est.estimate), sig10(est.half_width), est.episodes);
            if est.truncated > 0 {
                println!("{} episodes hit the step cap", est.truncated);
            }
            Ok(())
        }
        Command::Asv { config, agent, env } => {
            let config = match config {
                Some(path) => ScenarioConfig::from_toml(&load::read(&path)?).map_err(|e| CliError::input(Some(&path), e))?,
                None => ScenarioConfig::default(),
            };
            let sc = asv_scenario(&config).map_err(CliError::runtime)?;
            load::write(&agent, &print_program(&sc.program))?;
            load::write(&env, &sc.env.to_toml())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut err = std::io::stderr().lock();
            for o in e.objects() {
                let _ = writeln!(err, "{o}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
