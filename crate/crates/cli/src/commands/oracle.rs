//! `collapse oracle`: side-by-side matrix-free vs. dense brute-force
//! trajectories at toy sizes (dimension capped at 4096), reporting maximum
//! deviations. Run this before trusting large production runs.

use crate::config::RootConfig;
use crate::output;
use anyhow::{bail, Result};
use collapse_core::experiment::prepare_initial_state;
use collapse_core::model::{build_couplings, HamiltonianKernel};
use collapse_core::rng::derive_seed;
use collapse_core::solvers::chebyshev::{step_into, ChebWorkspace};
use collapse_core::solvers::lanczos::{lanczos_ground_state, LanczosConfig};
use collapse_core::C64;
use collapse_oracle as oracle;
use serde::Serialize;
use std::path::Path;

pub struct OracleArgs {
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct OracleCase {
    name: String,
    steps: usize,
    dt: f64,
    max_amplitude_deviation: f64,
    max_field_deviation: f64,
    threshold: f64,
    passed: bool,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    artifact: output::ArtifactInfo,
    conventions: output::Conventions,
    config: &'a RootConfig,
    seed: u64,
    dimension: usize,
    cases: Vec<OracleCase>,
    all_passed: bool,
}

/// Matrix-free stepping that mirrors the dense reference exactly: the same
/// frozen-field rule, states kept for amplitude-level comparison.
fn matrix_free_states(
    c: &collapse_core::model::CouplingSet,
    psi0: &[C64],
    dt: f64,
    steps: usize,
    cheb: &collapse_core::ChebyshevConfig,
    midpoint: bool,
    field_tolerance: f64,
) -> Result<Vec<Vec<C64>>> {
    let kernel = HamiltonianKernel::new(c);
    let mu = c.config.mu;
    let dim = psi0.len();
    let mut ws = ChebWorkspace::new(dim);
    let mut states = Vec::with_capacity(steps + 1);
    let mut cur = psi0.to_vec();
    let mut next = vec![C64::new(0.0, 0.0); dim];
    states.push(cur.clone());
    let field_of = |psi: &[C64], kernel: &HamiltonianKernel| -> f64 {
        let (f, n2) = kernel.field_and_norm_sqr(psi);
        f / n2
    };
    let mut b0 = field_of(&cur, &kernel);
    for step in 0..steps {
        let mut b_bar = b0;
        for iteration in 0..64 {
            let field_coeff = -mu * b_bar;
            let r = kernel.bound_with_field(field_coeff);
            step_into(&kernel, field_coeff, r, &cur, &mut next, dt, cheb, &mut ws)
                .map_err(anyhow::Error::new)?;
            if !midpoint || mu == 0.0 {
                break;
            }
            let b1 = field_of(&next, &kernel);
            let target = 0.5 * (b0 + b1);
            if (target - b_bar).abs() <= field_tolerance {
                break;
            }
            b_bar = target;
            if iteration == 63 {
                bail!("oracle midpoint iteration stalled at step {step}");
            }
        }
        std::mem::swap(&mut cur, &mut next);
        b0 = field_of(&cur, &kernel);
        states.push(cur.clone());
    }
    Ok(states)
}

pub fn execute(config: &RootConfig, args: &OracleArgs, out_dir: &Path) -> Result<()> {
    let model = config.model_config();
    let dim = 1usize << (1 + model.n_a + model.n_e);
    if dim > 4096 {
        bail!(
            "oracle requires 2^(1 + n_a + n_e) <= 4096 (got 2^{} = {dim}); \
             use --set model.n_e=... to shrink the toy universe",
            1 + model.n_a + model.n_e
        );
    }
    let seed = args.seed.unwrap_or(config.experiment.base_seed);
    let coupling_seed = derive_seed(seed, 0);
    let lanczos_seed = derive_seed(seed, 1);

    let c = build_couplings(&model, coupling_seed).map_err(anyhow::Error::new)?;
    let env_kernel = HamiltonianKernel::environment_only(&c);
    let (_, env) = lanczos_ground_state(
        |v, o| env_kernel.apply(0.0, v, o),
        1usize << model.n_e,
        &LanczosConfig {
            start_seed: lanczos_seed,
            ..config.lanczos_config()
        },
    )
    .map_err(anyhow::Error::new)?;
    let psi0 = prepare_initial_state(std::f64::consts::FRAC_PI_4, 0.0, &c, &env)
        .map_err(anyhow::Error::new)?;

    let cheb = config.chebyshev_config();
    let dt = config.trajectory.dt.min(0.1);
    let steps = ((config.trajectory.t_max / dt).round() as usize).min(200).max(10);
    let field_tol = 1e-13;
    let threshold = 1e-10;
    let mut cases = Vec::new();

    // Linear comparison (mu forced to zero).
    {
        let mut c_lin = c.clone();
        c_lin.config.mu = 0.0;
        let free = matrix_free_states(&c_lin, psi0.amplitudes(), dt, steps, &cheb, false, field_tol)?;
        let dense = oracle::dense_evolve(
            &c_lin,
            psi0.amplitudes(),
            dt,
            steps,
            oracle::DenseFieldUpdate::FrozenStart,
            field_tol,
        )
        .map_err(anyhow::Error::msg)?;
        let mut amp_dev = 0.0f64;
        let mut field_dev = 0.0f64;
        for (mf, dn) in free.iter().zip(dense.iter()) {
            for (a, b) in mf.iter().zip(dn.state.iter()) {
                amp_dev = amp_dev.max((a - b).norm());
            }
            let f: f64 = mf
                .iter()
                .enumerate()
                .map(|(k, a)| a.norm_sqr() * oracle::apparatus_mz_diag(&c_lin)[k])
                .sum();
            field_dev = field_dev.max((f - dn.b_tilde).abs());
        }
        cases.push(OracleCase {
            name: "linear".into(),
            steps,
            dt,
            max_amplitude_deviation: amp_dev,
            max_field_deviation: field_dev,
            threshold,
            passed: amp_dev < threshold,
        });
    }

    // Nonlinear comparison with identical midpoint freezing on both sides.
    {
        let free = matrix_free_states(&c, psi0.amplitudes(), dt, steps, &cheb, true, field_tol)?;
        let dense = oracle::dense_evolve(
            &c,
            psi0.amplitudes(),
            dt,
            steps,
            oracle::DenseFieldUpdate::SelfConsistentMidpoint,
            field_tol,
        )
        .map_err(anyhow::Error::msg)?;
        let mut amp_dev = 0.0f64;
        let mut field_dev = 0.0f64;
        let mz = oracle::apparatus_mz_diag(&c);
        for (mf, dn) in free.iter().zip(dense.iter()) {
            for (a, b) in mf.iter().zip(dn.state.iter()) {
                amp_dev = amp_dev.max((a - b).norm());
            }
            let f: f64 = mf.iter().enumerate().map(|(k, a)| a.norm_sqr() * mz[k]).sum();
            field_dev = field_dev.max((f - dn.b_tilde).abs());
        }
        cases.push(OracleCase {
            name: "nonlinear_midpoint".into(),
            steps,
            dt,
            max_amplitude_deviation: amp_dev,
            max_field_deviation: field_dev,
            threshold,
            passed: amp_dev < threshold,
        });
    }

    let all_passed = cases.iter().all(|c| c.passed);
    for case in &cases {
        println!(
            "{} oracle[{}]: {} steps at dt = {}, max amplitude deviation {:.3e}, max field deviation {:.3e} (threshold {:.0e})",
            if case.passed { "PASS" } else { "FAIL" },
            case.name,
            case.steps,
            case.dt,
            case.max_amplitude_deviation,
            case.max_field_deviation,
            case.threshold,
        );
    }
    let report = OracleReport {
        artifact: Default::default(),
        conventions: Default::default(),
        config,
        seed,
        dimension: dim,
        cases,
        all_passed,
    };
    output::write_json(&out_dir.join("oracle_report.json"), &report)?;
    println!(
        "oracle: {} — wrote {}",
        if all_passed { "matrix-free and dense agree" } else { "DEVIATIONS present" },
        out_dir.join("oracle_report.json").display()
    );
    if !all_passed {
        bail!("oracle comparison failed");
    }
    Ok(())
}
