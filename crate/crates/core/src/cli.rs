//! Command-line front end: `solve` for one MPS file and `bench` for a
//! directory of them.
//!
//! Exit codes: 0 optimal, 2 certified infeasible, 3 iteration or time
//! limit, 4 input error, 5 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::mps::read_mps_file;
use crate::solver::{solve, SolveResult, SolveStatus, SolverConfig};

pub const EXIT_OPTIMAL: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Default per-instance time limit of `bench`, in seconds.
pub const BENCH_TIME_LIMIT: f64 = 60.0;

#[derive(Debug, Parser)]
#[command(name = "pdlp", version, about = "Restarted PDHG linear programming solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one MPS file.
    Solve(SolveArgs),
    /// Solve every .mps file under a directory and write CSV records.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 100)]
    pub check_interval: u64,
    #[arg(long)]
    pub no_scaling: bool,
    #[arg(long)]
    pub adaptive_step: bool,
    #[arg(long)]
    pub primal_weight_updates: bool,
    #[arg(long)]
    pub no_restarts: bool,
    #[arg(long)]
    pub fishnet: bool,
    #[arg(long, default_value_t = 5)]
    pub fishnet_p: u32,
    #[arg(long, default_value_t = 100)]
    pub fishnet_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ConfigArgs {
    pub fn to_config(&self, default_time_limit: Option<f64>) -> SolverConfig {
        let mut cfg = SolverConfig {
            tolerance: self.tol,
            time_limit: self.time_limit.or(default_time_limit),
            theta: self.theta,
            check_interval: self.check_interval,
            enable_scaling: !self.no_scaling,
            enable_adaptive_step: self.adaptive_step,
            enable_primal_weight_updates: self.primal_weight_updates,
            enable_restarts: !self.no_restarts,
            enable_fishnet: self.fishnet,
            ..SolverConfig::default()
        };
        if let Some(m) = self.max_iters {
            cfg.max_iterations = Some(m);
        }
        cfg.fishnet.p = self.fishnet_p;
        cfg.fishnet.k = self.fishnet_k;
        cfg.fishnet.seed = self.seed;
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Print one JSON object instead of the text summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    pub dir: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Per-instance records.
    #[arg(long)]
    pub out: PathBuf,
    /// Fraction of instances solved against time.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal => EXIT_OPTIMAL,
        SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible => EXIT_INFEASIBLE,
        SolveStatus::IterationLimit | SolveStatus::TimeLimit => EXIT_LIMIT,
        SolveStatus::NumericalFailure => EXIT_NUMERICAL,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{e}");
                EXIT_OPTIMAL
            }
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args, out, err),
        Command::Bench(args) => cmd_bench(args, out, err),
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    instance: &'a str,
    #[serde(flatten)]
    result: &'a SolveResult,
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let form = match read_mps_file(&args.path) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", args.path.display());
            return EXIT_INPUT;
        }
    };
    for w in &form.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let cfg = args.config.to_config(None);
    let result = match solve(&form.problem, &cfg) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let name = instance_name(&args.path);
    if args.json {
        let report = JsonReport {
            instance: &name,
            result: &result,
        };
        let _ = writeln!(out, "{}", serde_json::to_string(&report).expect("result serializes"));
    } else {
        let _ = writeln!(out, "instance: {name}");
        let _ = writeln!(out, "status: {}", result.status.as_str().replace('_', " "));
        let _ = writeln!(out, "objective: {:.9e}", result.primal_objective);
        let _ = writeln!(out, "dual objective: {:.9e}", result.dual_objective);
        let _ = writeln!(
            out,
            "residuals: primal {:.3e}, dual {:.3e}, gap {:.3e}",
            result.primal_residual, result.dual_residual, result.gap
        );
        let _ = writeln!(
            out,
            "iterations: {}, restarts: {}, matvecs: {}, time: {:.3}s",
            result.iterations, result.restarts, result.matvec_count, result.wall_time
        );
    }
    exit_code(result.status)
}

/// One CSV row of `bench`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub status: String,
    pub iterations: Option<u64>,
    pub restarts: Option<u64>,
    pub wall_time_s: Option<f64>,
    pub matvecs: Option<u64>,
    pub objective: Option<f64>,
    pub primal_res: Option<f64>,
    pub dual_res: Option<f64>,
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub time_threshold: f64,
    pub fraction_solved: f64,
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn collect_mps(dir: &Path, found: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_mps(&path, found)?;
        } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mps")) {
            found.push(path);
        }
    }
    Ok(())
}

fn round_micros(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

/// Solves one file into a record. Parse failures become `input_error` rows.
pub fn bench_instance(path: &Path, config: &SolverConfig) -> BenchRecord {
    let fingerprint = config.fingerprint();
    let instance = instance_name(path);
    let failed = |status: &str| BenchRecord {
        instance: instance.clone(),
        status: status.to_string(),
        iterations: None,
        restarts: None,
        wall_time_s: None,
        matvecs: None,
        objective: None,
        primal_res: None,
        dual_res: None,
        config: fingerprint.clone(),
    };
    let form = match read_mps_file(path) {
        Ok(f) => f,
        Err(_) => return failed("input_error"),
    };
    match solve(&form.problem, config) {
        Ok(r) => BenchRecord {
            instance,
            status: r.status.as_str().to_string(),
            iterations: Some(r.iterations),
            restarts: Some(r.restarts),
            wall_time_s: Some(round_micros(r.wall_time)),
            matvecs: Some(r.matvec_count),
            objective: Some(r.primal_objective),
            primal_res: Some(r.primal_residual),
            dual_res: Some(r.dual_residual),
            config: fingerprint,
        },
        Err(_) => failed("input_error"),
    }
}

/// Cumulative fraction of instances solved to optimality by each distinct
/// solve time, ending at `horizon`.
pub fn survival_curve(records: &[BenchRecord], horizon: f64) -> Vec<CurvePoint> {
    let total = records.len().max(1) as f64;
    let mut times: Vec<f64> = records
        .iter()
        .filter(|r| r.status == SolveStatus::Optimal.as_str())
        .filter_map(|r| r.wall_time_s)
        .collect();
    times.sort_by(f64::total_cmp);
    let mut curve = vec![CurvePoint {
        time_threshold: 0.0,
        fraction_solved: 0.0,
    }];
    for (i, &t) in times.iter().enumerate() {
        let point = CurvePoint {
            time_threshold: t,
            fraction_solved: (i + 1) as f64 / total,
        };
        match curve.last_mut() {
            Some(last) if last.time_threshold == t => *last = point,
            _ => curve.push(point),
        }
    }
    let solved = times.len() as f64 / total;
    if curve.last().is_some_and(|p| p.time_threshold < horizon) {
        curve.push(CurvePoint {
            time_threshold: horizon,
            fraction_solved: solved,
        });
    }
    curve
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut files = Vec::new();
    if let Err(e) = collect_mps(&args.dir, &mut files) {
        let _ = writeln!(err, "error: {}: {e}", args.dir.display());
        return EXIT_INPUT;
    }
    if files.is_empty() {
        let _ = writeln!(err, "error: no .mps files under {}", args.dir.display());
        return EXIT_INPUT;
    }
    let config = args.config.to_config(Some(BENCH_TIME_LIMIT));
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut records: Vec<BenchRecord> =
        pool.install(|| files.par_iter().map(|f| bench_instance(f, &config)).collect());
    records.sort_by(|a, b| a.instance.cmp(&b.instance));

    if let Err(e) = write_csv(&args.out, &records) {
        let _ = writeln!(err, "error: {}: {e}", args.out.display());
        return EXIT_INPUT;
    }
    if let Some(curve_path) = &args.curve {
        let horizon = config.time_limit.unwrap_or(BENCH_TIME_LIMIT);
        if let Err(e) = write_csv(curve_path, &survival_curve(&records, horizon)) {
            let _ = writeln!(err, "error: {}: {e}", curve_path.display());
            return EXIT_INPUT;
        }
    }
    let solved = records
        .iter()
        .filter(|r| r.status == SolveStatus::Optimal.as_str())
        .count();
    let _ = writeln!(
        out,
        "{} instances, {} optimal, records written to {}",
        records.len(),
        solved,
        args.out.display()
    );
    EXIT_OPTIMAL
}
