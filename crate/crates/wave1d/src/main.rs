//! `wave1d` - semilinear wave equation solver and Schwarz waveform
//! relaxation experiment harness.
//!
//! Exit codes: 0 success, 2 configuration error, 3 blow-up, 4 iteration did
//! not converge within max_iters.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wave1d::config::ConfigFile;
use wave1d::experiments::{self, ExperimentOutcome};
use wave1d::output::resolve_out_dir;
use wave1d::{Error, Result};

#[derive(Parser)]
#[command(name = "wave1d", version, about = "1-D semilinear wave equation + Schwarz waveform relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum SweepName {
    #[value(name = "table1-left")]
    Table1Left,
    #[value(name = "table1-right")]
    Table1Right,
    #[value(name = "fig-u3")]
    FigU3,
    #[value(name = "fig-u2ux")]
    FigU2ux,
    #[value(name = "delta-sweep")]
    DeltaSweep,
}

#[derive(Subcommand)]
enum Command {
    /// Single-domain solve; writes the space-time field as CSV.
    Solve(CommonArgs),
    /// Nonoverlapping Schwarz waveform relaxation run.
    Swr(CommonArgs),
    /// Classical overlapping Schwarz run.
    Classical(CommonArgs),
    /// Named experiment sweep (table1-left, table1-right, fig-u3, fig-u2ux,
    /// delta-sweep), taken from the config or --experiment.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Built-in experiment name; overrides the config.
        #[arg(long, value_enum)]
        experiment: Option<SweepName>,
    },
    /// Self-convergence order study.
    Order(CommonArgs),
    /// Energy identity battery, lower-bound sampling, remainder records.
    EnergyCheck(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file (key = value with [sections]).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (WAVE1D_OUT overrides this flag).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn load_config(common: &CommonArgs) -> Result<ConfigFile> {
    match &common.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn set_threads(n: Option<usize>) {
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cli: Cli) -> Result<ExperimentOutcome> {
    match cli.command {
        Command::Solve(common) => {
            set_threads(common.threads);
            let cfg = load_config(&common)?;
            let out = resolve_out_dir(common.out.as_deref(), cfg.get("output", "dir"), "solve");
            experiments::run_custom_solve(&cfg, &out)
        }
        Command::Swr(common) => {
            set_threads(common.threads);
            let cfg = load_config(&common)?;
            let out = resolve_out_dir(common.out.as_deref(), cfg.get("output", "dir"), "swr");
            experiments::run_custom_swr(&cfg, &out)
        }
        Command::Classical(common) => {
            set_threads(common.threads);
            let cfg = load_config(&common)?;
            let out = resolve_out_dir(common.out.as_deref(), cfg.get("output", "dir"), "classical");
            experiments::run_custom_classical(&cfg, &out)
        }
        Command::Sweep { common, experiment } => {
            set_threads(common.threads);
            let mut cfg = load_config(&common)?;
            let name = match experiment {
                Some(SweepName::Table1Left) => "table1-left".to_string(),
                Some(SweepName::Table1Right) => "table1-right".to_string(),
                Some(SweepName::FigU3) => "fig-u3".to_string(),
                Some(SweepName::FigU2ux) => "fig-u2ux".to_string(),
                Some(SweepName::DeltaSweep) => "delta-sweep".to_string(),
                None => cfg
                    .get("experiment", "name")
                    .map(str::to_string)
                    .ok_or_else(|| {
                        Error::Config("sweep needs --experiment or [experiment] name".into())
                    })?,
            };
            cfg.set("experiment", "name", &name);
            let out = resolve_out_dir(common.out.as_deref(), cfg.get("output", "dir"), &name);
            experiments::run_experiment(&name, &cfg, &out)
        }
        Command::Order(common) => {
            set_threads(common.threads);
            let cfg = load_config(&common)?;
            let out = resolve_out_dir(common.out.as_deref(), cfg.get("output", "dir"), "order-study");
            experiments::run_experiment("order-study", &cfg, &out)
        }
        Command::EnergyCheck(common) => {
            set_threads(common.threads);
            let cfg = load_config(&common)?;
            let out = resolve_out_dir(common.out.as_deref(), cfg.get("output", "dir"), "energy-check");
            experiments::run_experiment("energy-check", &cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(outcome) => {
            if outcome.blow_ups > 0 {
                eprintln!("wave1d: {} run(s) blew up", outcome.blow_ups);
                ExitCode::from(3)
            } else if outcome.non_converged > 0 {
                eprintln!(
                    "wave1d: {} run(s) did not converge within max_iters",
                    outcome.non_converged
                );
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("wave1d: {err}");
            match err {
                Error::Config(_) => ExitCode::from(2),
                Error::BlowUp { .. } => ExitCode::from(3),
                Error::NonConvergence { .. } => ExitCode::from(4),
                Error::CflViolation { .. } => ExitCode::from(2),
                Error::Io(_) => ExitCode::from(1),
            }
        }
    }
}
