//! `collapse run`: one seeded measurement trajectory.

use crate::config::RootConfig;
use crate::output::{self, SeedSet};
use anyhow::{Context, Result};
use collapse_core::experiment::{classify_outcome, prepare_run, RunSpec};
use collapse_core::rng::derive_seed;
use collapse_core::solvers::evolve::evolve;
use std::path::Path;

pub struct RunArgs {
    pub theta_degrees: f64,
    pub phi_degrees: Option<f64>,
    /// Base seed; coupling/lanczos seeds derive as children 0 and 1.
    pub seed: Option<u64>,
    pub coupling_seed: Option<u64>,
    pub lanczos_seed: Option<u64>,
}

pub fn execute(config: &RootConfig, args: &RunArgs, out_dir: &Path) -> Result<()> {
    let base = args.seed.unwrap_or(config.experiment.base_seed);
    let coupling_seed = args.coupling_seed.unwrap_or_else(|| derive_seed(base, 0));
    let lanczos_seed = args.lanczos_seed.unwrap_or_else(|| derive_seed(base, 1));
    let phi_degrees = args.phi_degrees.unwrap_or(config.experiment.phi_degrees);

    let mut spec: RunSpec = super::run_spec(
        config,
        args.theta_degrees.to_radians(),
        coupling_seed,
        lanczos_seed,
    );
    spec.phi = phi_degrees.to_radians();

    let prepared = prepare_run(&spec).map_err(anyhow::Error::new)?;
    let env_energy = prepared.environment_energy;
    let traj = evolve(
        &prepared.couplings,
        &prepared.initial_state,
        &spec.trajectory,
        &spec.chebyshev,
        |_| {},
    )
    .map_err(anyhow::Error::new)?;
    let outcome = classify_outcome(&traj, &spec.outcome);

    let seeds = SeedSet {
        base_seed: args.seed.or(Some(config.experiment.base_seed)),
        coupling_seed,
        lanczos_seed,
    };
    let traj_path = out_dir.join("trajectory.csv");
    output::write_trajectory(
        &traj_path,
        config,
        &seeds,
        args.theta_degrees,
        phi_degrees,
        &traj.records,
    )?;
    let summary = output::RunSummary {
        artifact: Default::default(),
        conventions: Default::default(),
        config,
        seeds,
        theta_degrees: args.theta_degrees,
        phi_degrees,
        environment_ground_energy: env_energy,
        outcome: (&outcome).into(),
        stats: (&traj.stats).into(),
        records: traj.records.len(),
        trajectory_file: "trajectory.csv".into(),
    };
    output::write_json(&out_dir.join("run_summary.json"), &summary)
        .context("writing run summary")?;

    println!(
        "run: theta = {:.1} deg, outcome = {}, collapse_time = {}, final M = {:.4}, final <S_sys^z> = {:.4}",
        args.theta_degrees,
        match outcome.classification {
            collapse_core::experiment::Classification::CollapsedUp => "collapsed_up",
            collapse_core::experiment::Classification::CollapsedDown => "collapsed_down",
            collapse_core::experiment::Classification::Undecided => "undecided",
        },
        outcome
            .collapse_time
            .map(|t| format!("{t:.2}"))
            .unwrap_or_else(|| "-".into()),
        outcome.final_m,
        outcome.final_s_sys_z,
    );
    println!("run: wrote {}", traj_path.display());
    Ok(())
}
