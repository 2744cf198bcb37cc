//! Subcommand implementations.

pub mod ensemble;
pub mod oracle;
pub mod run;
pub mod validate;

use crate::config::RootConfig;
use collapse_core::experiment::RunSpec;

/// Assemble a core run specification from the resolved configuration.
pub fn run_spec(config: &RootConfig, theta: f64, coupling_seed: u64, lanczos_seed: u64) -> RunSpec {
    RunSpec {
        theta,
        phi: config.experiment.phi_degrees.to_radians(),
        coupling_seed,
        lanczos_seed,
        model: config.model_config(),
        trajectory: config.trajectory_config(),
        chebyshev: config.chebyshev_config(),
        lanczos: config.lanczos_config(),
        outcome: config.outcome_criteria(),
    }
}
