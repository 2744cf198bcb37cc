//! `collapse ensemble`: Born-rule statistics over seeded ensembles.

use crate::config::RootConfig;
use crate::output::{self, SeedSet};
use anyhow::{Context, Result};
use collapse_core::experiment::{born_curve_with, ensemble_seeds};
use std::path::Path;
use std::time::Instant;

pub struct EnsembleArgs {
    pub seed: Option<u64>,
    pub runs_per_theta: Option<usize>,
    pub keep_trajectories: bool,
}

pub fn execute(config: &RootConfig, args: &EnsembleArgs, out_dir: &Path) -> Result<()> {
    let base_seed = args.seed.unwrap_or(config.experiment.base_seed);
    let runs_per_theta = args.runs_per_theta.unwrap_or(config.experiment.runs_per_theta);
    let keep = args.keep_trajectories || config.experiment.keep_trajectories;
    let thetas: Vec<f64> = config
        .experiment
        .theta_grid_degrees
        .iter()
        .map(|d| d.to_radians())
        .collect();
    let template = super::run_spec(config, 0.0, 0, 0);

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let started = Instant::now();
    let thetas_deg = config.experiment.theta_grid_degrees.clone();
    let curve = born_curve_with(&thetas, runs_per_theta, base_seed, &template, |ti, ri, traj, _| {
        if keep {
            let (cs, ls) = ensemble_seeds(base_seed, ti, ri);
            let dir = out_dir
                .join("trajectories")
                .join(format!("theta_{:05.1}", thetas_deg[ti]));
            let seeds = SeedSet {
                base_seed: Some(base_seed),
                coupling_seed: cs,
                lanczos_seed: ls,
            };
            // Failures here abort nothing; the ensemble is the artifact.
            let _ = output::write_trajectory(
                &dir.join(format!("run_{ri:04}.csv")),
                config,
                &seeds,
                thetas_deg[ti],
                config.experiment.phi_degrees,
                &traj.records,
            );
        }
    })
    .map_err(anyhow::Error::new)?;
    let wall = started.elapsed().as_secs_f64();

    let summary = output::ensemble_summary(config, base_seed, &curve, wall);
    output::write_json(&out_dir.join("born_curve.json"), &summary)?;
    output::write_born_csv(&out_dir.join("born_curve.csv"), &summary)?;

    println!("ensemble: {} angles x {} runs in {:.1} s", thetas.len(), runs_per_theta, wall);
    for p in &summary.points {
        println!(
            "  theta = {:5.1} deg: up {:3}, down {:3}, undecided {:2}, failed {:2} | p_up = {}, ci95 = [{:.3}, {:.3}], cos^2 = {:.3}",
            p.theta_degrees,
            p.n_up,
            p.n_down,
            p.n_undecided,
            p.n_failed,
            p.p_up_estimate
                .map(|v| format!("{v:.3}"))
                .unwrap_or_else(|| "-".into()),
            p.ci95_low,
            p.ci95_high,
            p.reference_cos2,
        );
    }
    println!("ensemble: wrote {}", out_dir.join("born_curve.json").display());
    Ok(())
}
