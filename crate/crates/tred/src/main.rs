//! `tred`: configuration-driven experiment runner for time-dependent
//! reduced models. Each subcommand reproduces one experiment's data as
//! CSV files plus a JSON run manifest; `reduce` handles user-supplied
//! models and `fit-slope` estimates convergence exponents from emitted
//! error curves.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical breakdown.

mod config;
mod experiments;
mod output;
mod slope;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, ExperimentKind, Overrides};
use experiments::RunOutputs;
use output::{write_csv, write_manifest, Manifest};

/// Harness-level error with its process exit code.
#[derive(Debug)]
pub enum RunError {
    /// Invalid configuration or input files (exit code 2).
    Config(String),
    /// Numerical failure inside an experiment (exit code 3).
    Numerical(String),
    /// Filesystem trouble (exit code 1).
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numerical(m) => write!(f, "numerical error: {m}"),
            Self::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<tred_core::Error> for RunError {
    fn from(e: tred_core::Error) -> Self {
        match e {
            tred_core::Error::InvalidParameter(_) => Self::Config(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tred",
    version,
    about = "Time-dependent reduced-model experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random stable linear testbed: error curves and coefficient norms.
    LinearTestbed(RunArgs),
    /// Dephasing spin-boson model: exact vs second-order vs coarse-grained.
    SpinBoson(RunArgs),
    /// Dissipative central spin model: reduced dynamics per degree.
    CentralSpin(RunArgs),
    /// Ising chain with the diagonal projector.
    IsingChain(RunArgs),
    /// Reduce a user-supplied model given as JSON.
    Reduce(ReduceArgs),
    /// Fit convergence exponents from an emitted error-curve CSV.
    FitSlope(FitSlopeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Approximation degree N; repeat for several degrees.
    #[arg(long = "order")]
    orders: Vec<usize>,
    /// Number of propagator-series terms K.
    #[arg(long = "terms")]
    series_terms: Option<usize>,
    #[arg(long = "tmax")]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSVs and the manifest.
    #[arg(long = "out")]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Model-interchange JSON file with fields n, m, L, R, J.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct FitSlopeArgs {
    /// Error-curve CSV produced by an experiment run.
    csv: PathBuf,
    /// Lower end of the fit window.
    #[arg(long = "t-lo", default_value_t = 2e-3)]
    t_lo: f64,
    /// Upper end of the fit window.
    #[arg(long = "t-hi", default_value_t = 2e-1)]
    t_hi: f64,
    /// Where to write slopes.csv (defaults next to the input).
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self, model: Option<PathBuf>) -> Overrides {
        Overrides {
            orders: self.orders.clone(),
            series_terms: self.series_terms,
            t_max: self.t_max,
            steps: self.steps,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            model,
        }
    }
}

fn configure_threads() -> usize {
    let requested = std::env::var("TRED_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    if let Some(n) = requested {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    rayon::current_num_threads()
}

fn run_experiment(
    kind: ExperimentKind,
    args: &RunArgs,
    model: Option<PathBuf>,
) -> Result<Vec<String>, RunError> {
    let threads = configure_threads();
    let cfg = ExperimentConfig::load(kind, args.config.as_deref(), &args.overrides(model))?;
    let started = Instant::now();
    let outputs: RunOutputs = match kind {
        ExperimentKind::LinearTestbed => experiments::linear::run(&cfg)?,
        ExperimentKind::SpinBoson => experiments::spin_boson::run(&cfg)?,
        ExperimentKind::CentralSpin => experiments::central_spin::run(&cfg)?,
        ExperimentKind::IsingChain => experiments::ising::run(&cfg)?,
        ExperimentKind::Reduce => experiments::reduce::run(&cfg)?,
    };
    let manifest = Manifest {
        experiment: kind.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        outputs: outputs.files.clone(),
        breakdowns: outputs.breakdowns.clone(),
        warnings: outputs.warnings.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        threads,
    };
    write_manifest(&cfg.output_dir, &manifest)?;
    for warning in &outputs.warnings {
        eprintln!("warning: {warning}");
    }
    for file in &outputs.files {
        eprintln!("wrote {}", cfg.output_dir.join(file).display());
    }
    Ok(outputs.breakdowns)
}

fn run_fit_slope(args: &FitSlopeArgs) -> Result<(), RunError> {
    if args.t_lo <= 0.0 || args.t_hi <= args.t_lo {
        return Err(RunError::Config(format!(
            "fit-slope: need 0 < t-lo < t-hi, got {} and {}",
            args.t_lo, args.t_hi
        )));
    }
    let fits = slope::fit_order_slopes(&args.csv, args.t_lo, args.t_hi)?;
    for fit in &fits {
        match (fit.status, fit.slope) {
            (slope::FitStatus::Ok, Some(p)) => eprintln!(
                "{}: slope {:.3} ± {:.3} ({} points)",
                fit.series,
                p,
                fit.ci_high.unwrap() - p,
                fit.n_points
            ),
            _ => eprintln!(
                "{}: skipped, only {} usable points above the error floor",
                fit.series, fit.n_points
            ),
        }
    }
    let out = args
        .output
        .clone()
        .unwrap_or_else(|| args.csv.with_file_name("slopes.csv"));
    let (header, rows) = slope::slopes_csv_rows(&fits);
    write_csv(&out, &header, &rows)?;
    eprintln!("wrote {}", out.display());
    if fits
        .iter()
        .all(|f| f.status == slope::FitStatus::SkippedFloor)
    {
        return Err(RunError::Config(
            "fit-slope: no series had at least 5 usable points in the window".into(),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<Vec<String>, RunError> = match &cli.command {
        Command::LinearTestbed(args) => run_experiment(ExperimentKind::LinearTestbed, args, None),
        Command::SpinBoson(args) => run_experiment(ExperimentKind::SpinBoson, args, None),
        Command::CentralSpin(args) => run_experiment(ExperimentKind::CentralSpin, args, None),
        Command::IsingChain(args) => run_experiment(ExperimentKind::IsingChain, args, None),
        Command::Reduce(args) => {
            run_experiment(ExperimentKind::Reduce, &args.run, args.model.clone())
        }
        Command::FitSlope(args) => run_fit_slope(args).map(|()| Vec::new()),
    };
    match result {
        Ok(breakdowns) if breakdowns.is_empty() => ExitCode::SUCCESS,
        Ok(breakdowns) => {
            for b in &breakdowns {
                eprintln!("numerical breakdown: {b}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
