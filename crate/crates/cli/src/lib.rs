//! Subcommands of the `plapwave` binary. Each returns the process exit code.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use plapwave::artifacts::{self, write_atomic};
use plapwave::config::Expectation;
use plapwave::sources::classify_exponents;
use plapwave::verify::{verify_run, VerifyTolerances};
use plapwave::{
    simulate, DomainSpec, QuadratureParams, SimulationConfig, SpectralBasis, Termination,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNEXPECTED_BLOWUP: i32 = 2;
pub const EXIT_DT_UNDERFLOW: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "PLAPWAVE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "plapwave",
    version,
    about = "Spectral-Galerkin simulator for the damped p-Laplacian wave equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Robin eigenpairs on [0, L] as JSON.
    Spectrum(SpectrumArgs),
    /// Run one configuration and write trajectory.csv, energy.csv, summary.json.
    Simulate(SimulateArgs),
    /// Regime report for the exponents (p, q, r).
    Classify(ClassifyArgs),
    /// Re-check the stored invariants of a run directory.
    Verify(VerifyArgs),
    /// Run a configuration once per value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub length: f64,
    #[arg(long)]
    pub modes: usize,
    #[arg(long, default_value_t = plapwave::spectrum::DEFAULT_EIGEN_TOL)]
    pub tol: f64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub run_dir: PathBuf,
    /// Allowed |energy residual| relative to max(1, sup E_pos).
    #[arg(long, default_value_t = VerifyTolerances::default().energy_residual)]
    pub energy_residual: f64,
    #[arg(long, default_value_t = VerifyTolerances::default().positivity, allow_hyphen_values = true)]
    pub positivity: f64,
    #[arg(long, default_value_t = VerifyTolerances::default().dual_norm_trials)]
    pub dual_norm_trials: usize,
    #[arg(long, default_value_t = VerifyTolerances::default().dual_norm_states)]
    pub dual_norm_states: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub base_config: PathBuf,
    /// Dotted path into the config JSON, e.g. `dt0` or `initial_data.u0.value`.
    pub parameter: String,
    /// Comma-separated JSON values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub values: Vec<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Concurrent runs; capped by PLAPWAVE_THREADS.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Simulate(a) => cmd_simulate(&a.config, &a.out_dir),
        Command::Classify(a) => cmd_classify(a.p, a.q, a.r),
        Command::Verify(a) => cmd_verify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

// A closed stdout (e.g. piped into `head`) is not an error.
fn print_stdout(text: &str) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn emit(text: &str, out: Option<&Path>) -> std::result::Result<(), String> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(|e| e.to_string()),
        None => {
            print_stdout(text);
            Ok(())
        }
    }
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> i32 {
    if args.modes == 0 {
        return fail("--modes must be at least 1");
    }
    let basis = DomainSpec::new(args.length).and_then(|d| {
        SpectralBasis::with_params(d, args.modes, args.tol, QuadratureParams::default())
    });
    let basis = match basis {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let text = serde_json::to_string_pretty(basis.pairs()).expect("eigenpairs serialize");
    match emit(&text, args.out.as_deref()) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e),
    }
}

fn load_config(path: &Path) -> std::result::Result<SimulationConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg = SimulationConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    cfg.validate()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(cfg)
}

fn exit_code_for(termination: Termination, cfg: &SimulationConfig) -> i32 {
    match termination {
        Termination::Completed => EXIT_OK,
        Termination::BlowupDetected { .. } if cfg.expect == Some(Expectation::Global) => {
            EXIT_UNEXPECTED_BLOWUP
        }
        Termination::BlowupDetected { .. } => EXIT_OK,
        Termination::DtUnderflow { .. } => EXIT_DT_UNDERFLOW,
    }
}

/// Runs `cfg` and writes its artifacts into `out_dir`.
fn run_to_dir(
    cfg: &SimulationConfig,
    out_dir: &Path,
) -> std::result::Result<artifacts::RunSummary, String> {
    fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let start = Instant::now();
    let traj = simulate(cfg).map_err(|e| e.to_string())?;
    artifacts::write_run(out_dir, &traj, start.elapsed().as_secs_f64()).map_err(|e| e.to_string())
}

pub fn cmd_simulate(config: &Path, out_dir: &Path) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let summary = match run_to_dir(&cfg, out_dir) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let code = exit_code_for(summary.termination, &cfg);
    match summary.termination {
        Termination::Completed => eprintln!("completed at t = {}", summary.final_time),
        Termination::BlowupDetected { t } => eprintln!("blow-up detected at t = {t}"),
        Termination::DtUnderflow { t } => eprintln!("time step underflow at t = {t}"),
    }
    code
}

pub fn cmd_classify(p: f64, q: f64, r: f64) -> i32 {
    match classify_exponents(p, q, r) {
        Ok(report) => {
            print_stdout(&serde_json::to_string_pretty(&report).expect("report serializes"));
            EXIT_OK
        }
        Err(e) => fail(e),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> i32 {
    let tol = VerifyTolerances {
        energy_residual: args.energy_residual,
        positivity: args.positivity,
        dual_norm_trials: args.dual_norm_trials,
        dual_norm_states: args.dual_norm_states,
    };
    let report = match verify_run(&args.run_dir, &tol) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    print_stdout(&serde_json::to_string_pretty(&report).expect("report serializes"));
    match report.first_failure() {
        None => EXIT_OK,
        Some(check) => {
            eprintln!("invariant violated: {}: {}", check.name, check.detail);
            EXIT_INVARIANT
        }
    }
}

/// Replaces the value at a dotted `path` inside `root`.
pub fn set_dotted(root: &mut Value, path: &str, value: Value) -> std::result::Result<(), String> {
    let mut keys = path.split('.').peekable();
    let mut node = root;
    while let Some(key) = keys.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("`{path}`: `{key}` is not inside an object"))?;
        if keys.peek().is_none() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(key)
            .ok_or_else(|| format!("`{path}`: no field `{key}`"))?;
    }
    Err("empty parameter path".into())
}

fn parse_value(text: &str) -> Value {
    let text = text.trim();
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub value: Value,
    pub dir: String,
    pub termination: Termination,
    pub final_time: f64,
    pub sup_energy: f64,
    pub max_abs_energy_residual: f64,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct SweepIndex {
    pub parameter: String,
    pub runs: Vec<SweepEntry>,
}

pub fn sweep_threads(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let n = requested.unwrap_or(available).max(1);
    cap.map_or(n, |c| n.min(c))
}

pub fn cmd_sweep(args: &SweepArgs) -> i32 {
    if args.values.is_empty() {
        return fail("sweep needs at least one value");
    }
    let base_text = match fs::read_to_string(&args.base_config) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", args.base_config.display())),
    };
    let base: Value = match serde_json::from_str(&base_text) {
        Ok(v) => v,
        Err(e) => return fail(format!("{}: {e}", args.base_config.display())),
    };
    let mut configs = Vec::with_capacity(args.values.len());
    for raw in &args.values {
        let value = parse_value(raw);
        let mut doc = base.clone();
        if let Err(e) = set_dotted(&mut doc, &args.parameter, value.clone()) {
            return fail(e);
        }
        let cfg: SimulationConfig = match serde_json::from_value(doc) {
            Ok(c) => c,
            Err(e) => return fail(format!("{} = {value}: {e}", args.parameter)),
        };
        if let Err(e) = cfg.validate() {
            return fail(format!("{} = {value}: {e}", args.parameter));
        }
        configs.push((value, cfg));
    }
    if let Err(e) = fs::create_dir_all(&args.out_dir) {
        return fail(format!("{}: {e}", args.out_dir.display()));
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads(args.parallelism))
        .build()
    {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let results: Vec<_> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, (value, cfg))| {
                let name = format!("run_{i:03}");
                let summary = run_to_dir(cfg, &args.out_dir.join(&name))?;
                let records =
                    artifacts::read_energy(&args.out_dir.join(&name)).map_err(|e| e.to_string())?;
                let max_res = records
                    .iter()
                    .map(|r| r.energy_residual.abs())
                    .fold(0.0, f64::max);
                Ok(SweepEntry {
                    index: i,
                    value: value.clone(),
                    dir: name,
                    termination: summary.termination,
                    final_time: summary.final_time,
                    sup_energy: summary.sup_energy,
                    max_abs_energy_residual: max_res,
                    exit_code: exit_code_for(summary.termination, cfg),
                })
            })
            .collect::<Vec<std::result::Result<SweepEntry, String>>>()
    });
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(entry) => runs.push(entry),
            Err(e) => return fail(e),
        }
    }
    let index = SweepIndex {
        parameter: args.parameter.clone(),
        runs,
    };
    let text = serde_json::to_string_pretty(&index).expect("index serializes");
    if let Err(e) = write_atomic(&args.out_dir.join("index.json"), text.as_bytes()) {
        return fail(e);
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dotted_paths() {
        let mut v = json!({"a": {"b": 1}, "c": 2});
        set_dotted(&mut v, "a.b", json!(5)).unwrap();
        set_dotted(&mut v, "c", json!(0.5)).unwrap();
        assert_eq!(v, json!({"a": {"b": 5}, "c": 0.5}));
        assert!(set_dotted(&mut v, "x.y", json!(1)).is_err());
        assert!(set_dotted(&mut v, "c.d", json!(1)).is_err());
    }

    #[test]
    fn values_parse_as_json_or_text() {
        assert_eq!(parse_value("1e-3"), json!(1e-3));
        assert_eq!(parse_value(" rk4 "), json!("rk4"));
        assert_eq!(parse_value("\"imex\""), json!("imex"));
    }
}
