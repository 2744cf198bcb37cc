//! Spin-collapse simulator CLI.

use anyhow::Result;
use clap::{Parser, Subcommand};
use collapse_cli::commands::{ensemble, oracle, run, validate};
use collapse_cli::config::RootConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "collapse",
    version,
    about = "Many-body simulator of a spin measured by a nonlinear ferromagnet in a spin-glass environment",
    after_help = "Environment: COLLAPSE_THREADS caps the worker thread count.\n\
                  Exit codes: 0 success, 2 configuration error, 3 solver error, 4 invariant violation."
)]
struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. --set model.mu=6.0 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded measurement trajectory; writes trajectory.csv and run_summary.json.
    Run {
        /// Preparation angle of the measured spin, degrees in [0, 90].
        #[arg(long = "theta-deg", default_value_t = 45.0)]
        theta_deg: f64,
        /// Preparation phase, degrees (defaults to the config value).
        #[arg(long = "phi-deg")]
        phi_deg: Option<f64>,
        /// Base seed; coupling and environment seeds derive from it.
        #[arg(long)]
        seed: Option<u64>,
        /// Explicit coupling realization seed (overrides --seed derivation).
        #[arg(long = "coupling-seed")]
        coupling_seed: Option<u64>,
        /// Explicit environment-state seed (overrides --seed derivation).
        #[arg(long = "lanczos-seed")]
        lanczos_seed: Option<u64>,
    },
    /// Born-statistics ensemble over the configured theta grid.
    Ensemble {
        /// Base seed of the ensemble (defaults to experiment.base_seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "runs-per-theta")]
        runs_per_theta: Option<usize>,
        /// Also write every member trajectory under out/trajectories/.
        #[arg(long = "keep-trajectories", default_value_t = false)]
        keep_trajectories: bool,
    },
    /// Run the invariant suite (Hermiticity, unitarity, conservation, oracles).
    Validate,
    /// Compare matrix-free and dense propagation on a toy universe (dim <= 4096).
    Oracle {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn dispatch(cli: Cli) -> Result<i32> {
    collapse_cli::init_threads()?;
    let config = RootConfig::resolve(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Run {
            theta_deg,
            phi_deg,
            seed,
            coupling_seed,
            lanczos_seed,
        } => {
            if !(0.0..=90.0).contains(&theta_deg) {
                anyhow::bail!("--theta-deg must lie in [0, 90], got {theta_deg}");
            }
            run::execute(
                &config,
                &run::RunArgs {
                    theta_degrees: theta_deg,
                    phi_degrees: phi_deg,
                    seed,
                    coupling_seed,
                    lanczos_seed,
                },
                &cli.out_dir,
            )?;
            Ok(0)
        }
        Command::Ensemble {
            seed,
            runs_per_theta,
            keep_trajectories,
        } => {
            if runs_per_theta == Some(0) {
                anyhow::bail!("--runs-per-theta must be >= 1");
            }
            ensemble::execute(
                &config,
                &ensemble::EnsembleArgs {
                    seed,
                    runs_per_theta,
                    keep_trajectories,
                },
                &cli.out_dir,
            )?;
            Ok(0)
        }
        Command::Validate => {
            let ok = validate::execute(&config, &cli.out_dir)?;
            Ok(if ok { 0 } else { 4 })
        }
        Command::Oracle { seed } => {
            oracle::execute(&config, &oracle::OracleArgs { seed }, &cli.out_dir)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(collapse_cli::exit_code_for(&err) as u8)
        }
    }
}
