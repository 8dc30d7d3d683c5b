//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use estkit_core::experiments::{
    deviation_experiment, matrix_norm_bound_check, section_diameter_experiment, sweep,
    symmetrization_contraction_check, ExperimentKind, NoiseModel, SweepRecord,
};
use estkit_core::geometry::{local_mean_width_mc_with, mean_width_mc_with, WidthEstimate};
use estkit_core::observations::RowKind;
use estkit_core::rng::{gaussian_vec, trial_rng};
use estkit_core::sets::make_set;
use estkit_core::{SetDescriptor, SetKind};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{load_config, OutputFormat, Overrides, SolverChoice, SweepConfig};
use crate::descriptor::{parse_set, SetJson};
use crate::error::{CliError, CliResult};
use crate::output::{emit, to_csv, to_json, write_manifest};
use crate::pool::WorkerPool;

#[derive(Debug, Parser)]
#[command(name = "estkit", version, about = "Structured estimation from random observations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo Gaussian mean width of a set.
    Width(WidthArgs),
    /// ℓ1 (or gauge) recovery from noisy linear observations.
    Recover(SweepArgs),
    /// Coefficient recovery in a redundant dictionary.
    DictRecover(SweepArgs),
    /// Nuclear-norm recovery of a low-rank matrix.
    Lowrank(SweepArgs),
    /// Matrix completion from sampled entries.
    Complete(SweepArgs),
    /// Single-bit estimation.
    Onebit(SweepArgs),
    /// Single-index estimation by projection.
    Project(SweepArgs),
    /// Hyperplane tessellation cell diameters.
    Tessellate(SweepArgs),
    /// Geometric inequality checks.
    Verify(VerifyArgs),
    /// Exact recovery rates against the descent cone width.
    Phase(SweepArgs),
    /// Any experiment, taken from the config or `--experiment`.
    Sweep(SweepArgs),
    /// Gauge minimization over an explicit set.
    Regress(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Trial threads; output does not depend on it.
    #[arg(long, env = "ESTKIT_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    /// Set descriptor as JSON.
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Local width at this radius instead of the global width.
    #[arg(long)]
    pub local: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_serde<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML or JSON sweep configuration; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_serde::<ExperimentKind>)]
    pub experiment: Option<ExperimentKind>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Measurement grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Set descriptor as JSON.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long, value_parser = parse_serde::<RowKind>)]
    pub rows: Option<RowKind>,
    /// Link name (`sign`, `logistic`, `linear`) or JSON.
    #[arg(long)]
    pub link: Option<String>,
    #[arg(long, value_parser = parse_serde::<NoiseModel>)]
    pub noise: Option<NoiseModel>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(flatten)]
    pub common: Common,
}

impl SweepArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            experiment: self.experiment,
            n: self.n,
            m: self.m.clone(),
            s: self.s,
            r: self.r,
            eps: self.eps.clone(),
            trials: self.trials,
            seed: self.common.seed,
            set: self.set.clone(),
            rows: self.rows,
            link: self.link.clone(),
            noise: self.noise,
            solver: self.solver,
            pairs: self.pairs,
            output: self.common.output.clone(),
            format: self.format,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    All,
    Width,
    Deviation,
    Symmetrization,
    Gordon,
    Section,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Check::All)]
    pub check: Check,
    /// Ambient dimension for the point-set and section checks.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[serde(skip)]
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    check: &'static str,
    passed: bool,
    details: Value,
}

fn pool(common: &Common) -> CliResult<WorkerPool> {
    WorkerPool::new(common.workers).map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

fn print(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

/// Run one invocation, writing primary output to `out` when no `--output`
/// path is given.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let (fixed, args) = match cli.command {
        Command::Width(a) => return run_width(a, out),
        Command::Verify(a) => return run_verify(a, out),
        Command::Sweep(a) => (None, a),
        Command::Recover(a) => (Some(ExperimentKind::Recover), a),
        Command::Regress(a) => (Some(ExperimentKind::Regress), a),
        Command::DictRecover(a) => (Some(ExperimentKind::DictRecover), a),
        Command::Lowrank(a) => (Some(ExperimentKind::Lowrank), a),
        Command::Complete(a) => (Some(ExperimentKind::Complete), a),
        Command::Onebit(a) => (Some(ExperimentKind::Onebit), a),
        Command::Project(a) => (Some(ExperimentKind::Project), a),
        Command::Tessellate(a) => (Some(ExperimentKind::Tessellate), a),
        Command::Phase(a) => (Some(ExperimentKind::Phase), a),
    };
    let mut overrides = args.overrides();
    if let Some(kind) = fixed {
        if overrides.experiment.is_some_and(|e| e != kind) {
            return Err(CliError::Config(format!("--experiment conflicts with subcommand {}", kind.name())));
        }
        overrides.experiment = Some(kind);
    }
    let config = load_config(args.config.as_deref(), &overrides)?;
    if let Some(kind) = fixed {
        if config.experiment != kind {
            return Err(CliError::Config(format!(
                "config experiment {} conflicts with subcommand {}",
                config.experiment.name(),
                kind.name()
            )));
        }
    }
    run_sweep(&config, &pool(&args.common)?, out)
}

/// Execute a resolved sweep and write its outputs.
pub fn run_sweep(config: &SweepConfig, exec: &WorkerPool, out: &mut dyn Write) -> CliResult<()> {
    let plan = config.to_plan()?;
    log::info!("{} sweep over {} grid points on {} workers", plan.experiment.name(), plan.m_grid.len(), exec.workers());
    let (records, fit) = sweep(exec, &plan)?;
    match &config.output {
        Some(path) => {
            emit(&records, fit.as_ref(), config.format, path)?;
            write_manifest(path, config.experiment.name(), config.seed, config)?;
        }
        None => {
            let body = match config.format {
                OutputFormat::Csv => to_csv(&records),
                OutputFormat::Json => to_json(&records),
            };
            print(out, &body)?;
            if let Some(fit) = &fit {
                log::info!("fit: slope {:.4}, r² {:.4}", fit.slope, fit.r2);
            }
        }
    }
    let stalled = not_converged(&records);
    if stalled > 0 {
        return Err(CliError::PartialResults(stalled));
    }
    Ok(())
}

fn not_converged(records: &[SweepRecord]) -> usize {
    records.iter().map(|r| r.extra.get("not_converged").copied().unwrap_or(0.0) as usize).sum()
}

fn run_width(args: WidthArgs, out: &mut dyn Write) -> CliResult<()> {
    let desc = parse_set(&args.set).map_err(CliError::Config)?;
    let set = make_set(desc.clone())?;
    let seed = args.common.seed.unwrap_or(0);
    let exec = pool(&args.common)?;
    let est: WidthEstimate = match args.local {
        Some(r) => local_mean_width_mc_with(&exec, &set, r, args.trials, seed)?,
        None => mean_width_mc_with(&exec, &set, args.trials, seed)?,
    };
    let body = serde_json::to_string_pretty(&est).expect("estimates serialize") + "\n";
    match &args.common.output {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| CliError::io(path, e))?;
            let config = json!({ "set": SetJson(desc), "trials": args.trials, "local": args.local, "seed": seed });
            write_manifest(path, "width", seed, &config)?;
            Ok(())
        }
        None => print(out, &body),
    }
}

fn sphere_points(count: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = trial_rng(seed, &[u64::MAX]);
    (0..count)
        .map(|_| {
            let g = gaussian_vec(&mut rng, n);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            g.into_iter().map(|v| v / norm).collect()
        })
        .collect()
}

fn run_verify(args: VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let exec = pool(&args.common)?;
    let seed = args.common.seed.unwrap_or(0);
    let wants = |c: Check| args.check == Check::All || args.check == c;
    let mut results = Vec::new();
    if wants(Check::Width) {
        let set = make_set(SetDescriptor::new(SetKind::EuclideanBall { radius: 1.0 }, 2))?;
        let est = mean_width_mc_with(&exec, &set, 100_000, seed)?;
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        results.push(CheckResult {
            check: "width",
            passed: (est.mean - exact).abs() <= 3.0 * est.stderr,
            details: json!({ "estimate": est, "exact": exact }),
        });
    }
    if wants(Check::Deviation) {
        let points = sphere_points(100, args.n, seed);
        let rep = deviation_experiment(&exec, &points, args.m, args.trials, seed)?;
        results.push(CheckResult {
            check: "deviation",
            passed: rep.passed == args.trials,
            details: json!({ "passed": rep.passed, "trials": args.trials, "rhs": rep.rhs, "lhs_max": rep.lhs.iter().copied().fold(0.0, f64::max) }),
        });
    }
    if wants(Check::Symmetrization) {
        let points = sphere_points(50, args.n, seed);
        let trials = 2 * args.trials;
        let rep = symmetrization_contraction_check(&exec, &points, 16, trials, 200, seed)?;
        let need = (0.99 * trials as f64).ceil() as usize;
        results.push(CheckResult {
            check: "symmetrization",
            passed: rep.symmetrization_passed >= need && rep.contraction_passed >= need,
            details: serde_json::to_value(&rep).expect("report serializes"),
        });
    }
    if wants(Check::Gordon) {
        let rep = matrix_norm_bound_check(&exec, 100, 100, RowKind::Gaussian, 50, seed)?;
        results.push(CheckResult {
            check: "gordon",
            passed: rep.gordon_holds,
            details: serde_json::to_value(&rep).expect("report serializes"),
        });
    }
    if wants(Check::Section) {
        let n = args.n.max(2);
        let set = make_set(SetDescriptor::new(SetKind::L1Ball { radius: 1.0 }, n))?;
        let rec = section_diameter_experiment(&exec, &set, n / 2, 200, 20, seed)?;
        let ratio_mean = rec.extra.get("ratio_mean").copied().unwrap_or(f64::NAN);
        results.push(CheckResult {
            check: "section",
            passed: (0.05..=20.0).contains(&ratio_mean),
            details: serde_json::to_value(&rec).expect("record serializes"),
        });
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let body = serde_json::to_string_pretty(&results).expect("results serialize") + "\n";
    match &args.common.output {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| CliError::io(path, e))?;
            write_manifest(path, "verify", seed, &args)?;
        }
        None => print(out, &body)?,
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
