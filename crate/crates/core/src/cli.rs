//! Command-line front end: `run`, `batch`, `render` and `verify`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use num_traits::Signed;
use rayon::prelude::*;
use serde_json::json;

use crate::geom::{format_rational, parse_rational, Rational};
use crate::model::{Light, Mode};
use crate::render::render_trace;
use crate::scenario::{parse_pattern, Scenario};
use crate::sim::{
    Outcome, SchedulerKind, SchedulerPolicy, SimError, Simulation, Status, Trace, DEFAULT_MAX_EVENTS,
};
use crate::verify::{check_solvable, classify, Solvability};

pub const EXIT_FORMED: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNSOLVABLE: i32 = 2;
pub const EXIT_COLLISION: i32 = 3;
pub const EXIT_NOT_FORMED: i32 = 4;

pub fn exit_code(status: &Status) -> i32 {
    match status {
        Status::Formed => EXIT_FORMED,
        Status::Collision { .. } => EXIT_COLLISION,
        Status::QuiescentNotFormed | Status::EventBudgetExhausted => EXIT_NOT_FORMED,
    }
}

#[derive(Parser, Debug)]
#[command(name = "apf", version, about = "Simulate arbitrary pattern formation by opaque luminous robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation (or a batch with --batch).
    Run(RunArgs),
    /// Run simulations for consecutive seeds and print a CSV summary.
    Batch(RunArgs),
    /// Render SVG frames from a trace file.
    Render(RenderArgs),
    /// Classify a scenario's initial configuration and check solvability.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Pattern JSON file, replacing the scenario's pattern.
    #[arg(long)]
    pattern: Option<PathBuf>,
    /// Expected mode; must agree with the scenario.
    #[arg(long)]
    mode: Option<Mode>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    #[arg(long, default_value = "fsync")]
    scheduler: SchedulerKind,
    /// Seed (base seed for batches). Required for ssync and async.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_EVENTS)]
    max_events: usize,
    /// Trace output (JSONL). For batches, a directory receiving one trace per seed.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Directory for SVG frames.
    #[arg(long)]
    render: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    every: usize,
    /// Draw lines of sight from this robot in rendered frames.
    #[arg(long)]
    observer: Option<usize>,
    /// Number of runs with seeds seed..seed+N-1.
    #[arg(long)]
    batch: Option<usize>,
    /// Bound on every phase delay, as a rational string.
    #[arg(long, env = "APF_MAX_PHASE_DELAY")]
    max_phase_delay: Option<String>,
    /// Batch CSV output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    trace: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    every: usize,
    #[arg(long)]
    observer: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: ScenarioArgs,
}

/// Validated inputs of a run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub policy: SchedulerPolicy,
    pub max_events: usize,
    pub trace: Option<PathBuf>,
    pub render: Option<PathBuf>,
    pub every: usize,
    pub observer: Option<usize>,
}

#[derive(Debug)]
struct InputError(String);

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario, InputError> {
    let pattern = match &args.pattern {
        Some(p) => Some(parse_pattern(&read(p)?).map_err(|e| InputError(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let scenario = Scenario::parse_with_pattern(&read(&args.scenario)?, pattern)
        .map_err(|e| InputError(format!("{}: {e}", args.scenario.display())))?;
    if let Some(m) = args.mode {
        if m != scenario.mode {
            return Err(InputError(format!("--mode {m} disagrees with the scenario's mode {}", scenario.mode)));
        }
    }
    Ok(scenario)
}

fn load_config(args: &RunArgs) -> Result<RunConfig, InputError> {
    let scenario = load_scenario(&args.input)?;
    let seed = match (args.seed, args.scheduler) {
        (Some(s), _) => s,
        (None, SchedulerKind::Fsync | SchedulerKind::Mirrored) => 0,
        (None, kind) => return Err(InputError(format!("--seed is required for the {kind} scheduler"))),
    };
    let mut policy = SchedulerPolicy::new(args.scheduler, seed);
    if let Some(m) = &args.max_phase_delay {
        let m = parse_rational(m).map_err(|e| InputError(format!("max phase delay: {e}")))?;
        if !m.is_positive() {
            return Err(InputError("max phase delay must be positive".into()));
        }
        policy = policy.with_max_phase_delay(m);
    }
    if args.max_events == 0 {
        return Err(InputError("--max-events must be at least 1".into()));
    }
    if args.every == 0 {
        return Err(InputError("--every must be at least 1".into()));
    }
    Ok(RunConfig {
        scenario,
        policy,
        max_events: args.max_events,
        trace: args.trace.clone(),
        render: args.render.clone(),
        every: args.every,
        observer: args.observer,
    })
}

/// Rejects inputs that cannot be formed before simulating.
fn solvability_gate(scenario: &Scenario) -> Option<Rational> {
    match check_solvable(&scenario.to_world(), scenario.mode) {
        Solvability::Solvable => None,
        Solvability::Unsolvable { axis_y } => Some(axis_y),
    }
}

fn simulate(config: &RunConfig, seed: u64) -> Result<(Trace, Outcome), SimError> {
    let mut policy = config.policy.clone();
    policy.seed = seed;
    Ok(Simulation::new(config.scenario.to_world(), policy, config.max_events)?.finish())
}

pub fn cmd_run(config: &RunConfig) -> i32 {
    if let Some(axis) = solvability_gate(&config.scenario) {
        eprintln!("unsolvable: the configuration is mirror-symmetric about y = {axis} with no robot on the axis");
        return EXIT_UNSOLVABLE;
    }
    let (trace, outcome) = match simulate(config, config.policy.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Some(path) = &config.trace {
        if let Err(e) = trace.write_jsonl(path) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    println!("status: {}", outcome.status);
    println!("events: {}", outcome.event_count);
    println!("final class: {}", outcome.final_class.map_or("unstable", |c| c.as_str()));
    if let Some(dir) = &config.render {
        match render_trace(&trace, dir, config.every, config.observer) {
            Ok(files) => println!("rendered {} frames into {}", files.len(), dir.display()),
            Err(e) => {
                eprintln!("error: rendering: {e}");
                return EXIT_INPUT;
            }
        }
    }
    exit_code(&outcome.status)
}

/// One CSV row per seed: seed, status, events, first leader event, colours.
pub fn batch_rows(config: &RunConfig, base: u64, count: usize) -> Result<Vec<(Vec<String>, Status, Trace)>, SimError> {
    let seeds: Vec<u64> = (0..count as u64).map(|k| base + k).collect();
    let results: Vec<Result<(Trace, Outcome), SimError>> = seeds.par_iter().map(|&s| simulate(config, s)).collect();
    let mut rows = Vec::with_capacity(count);
    for (seed, r) in seeds.into_iter().zip(results) {
        let (trace, outcome) = r?;
        let colors: Vec<&str> = trace.colors_used().into_iter().map(Light::as_str).collect();
        let row = vec![
            seed.to_string(),
            outcome.status.as_str().to_string(),
            outcome.event_count.to_string(),
            trace.first_color_event(Light::Leader).map(|i| i.to_string()).unwrap_or_default(),
            colors.join("|"),
        ];
        rows.push((row, outcome.status, trace));
    }
    Ok(rows)
}

pub fn cmd_batch(config: &RunConfig, count: usize, out: Option<&Path>) -> i32 {
    if count == 0 {
        eprintln!("error: --batch must be at least 1");
        return EXIT_INPUT;
    }
    if let Some(axis) = solvability_gate(&config.scenario) {
        eprintln!("unsolvable: the configuration is mirror-symmetric about y = {axis} with no robot on the axis");
        return EXIT_UNSOLVABLE;
    }
    let rows = match batch_rows(config, config.policy.seed, count) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Some(dir) = &config.trace {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return EXIT_INPUT;
        }
        for (row, _, trace) in &rows {
            let path = dir.join(format!("seed_{}.jsonl", row[0]));
            if let Err(e) = trace.write_jsonl(&path) {
                eprintln!("error: writing {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
    }
    let sink: Box<dyn Write> = match out {
        Some(p) => match std::fs::File::create(p) {
            Ok(f) => Box::new(f),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return EXIT_INPUT;
            }
        },
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let written = w
        .write_record(["seed", "status", "events", "first_leader_event", "colors_used"])
        .and_then(|_| rows.iter().try_for_each(|(row, _, _)| w.write_record(row)))
        .and_then(|_| w.flush().map_err(csv::Error::from));
    if let Err(e) = written {
        eprintln!("error: writing CSV: {e}");
        return EXIT_INPUT;
    }
    rows.iter().map(|(_, s, _)| exit_code(s)).max().unwrap_or(EXIT_FORMED)
}

fn cmd_render(args: &RenderArgs) -> i32 {
    let trace = match Trace::read_jsonl(&args.trace) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.trace.display());
            return EXIT_INPUT;
        }
    };
    match render_trace(&trace, &args.out, args.every, args.observer) {
        Ok(files) => {
            println!("rendered {} frames into {}", files.len(), args.out.display());
            EXIT_FORMED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// `{"class": ..., "solvable": ..., "axis_y": ...}` for the initial world.
pub fn verify_report(scenario: &Scenario) -> serde_json::Value {
    let world = scenario.to_world();
    let class = classify(&world, &scenario.pattern, scenario.mode).expect("initial worlds are stable");
    match check_solvable(&world, scenario.mode) {
        Solvability::Solvable => json!({"class": class, "solvable": true}),
        Solvability::Unsolvable { axis_y } => {
            json!({"class": class, "solvable": false, "axis_y": format_rational(&axis_y)})
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> i32 {
    match load_scenario(&args.input) {
        Ok(s) => {
            println!("{}", verify_report(&s));
            EXIT_FORMED
        }
        Err(InputError(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_FORMED,
                _ => EXIT_INPUT,
            };
        }
    };
    let with_config = |args: &RunArgs, f: &dyn Fn(&RunConfig) -> i32| match load_config(args) {
        Ok(c) => f(&c),
        Err(InputError(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    };
    match &cli.command {
        Command::Run(a) => match a.batch {
            Some(count) => with_config(a, &|c| cmd_batch(c, count, a.out.as_deref())),
            None => with_config(a, &cmd_run),
        },
        Command::Batch(a) => with_config(a, &|c| cmd_batch(c, a.batch.unwrap_or(1), a.out.as_deref())),
        Command::Render(a) => cmd_render(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_cover_every_status() {
        assert_eq!(exit_code(&Status::Formed), 0);
        assert_eq!(exit_code(&Status::Collision { time: Rational::default(), pair: (0, 1) }), 3);
        assert_eq!(exit_code(&Status::QuiescentNotFormed), 4);
        assert_eq!(exit_code(&Status::EventBudgetExhausted), 4);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["apf", "frobnicate"]), EXIT_INPUT);
        assert_eq!(main_with_args(["apf", "run"]), EXIT_INPUT);
        assert_eq!(main_with_args(["apf", "--help"]), EXIT_FORMED);
    }
}
