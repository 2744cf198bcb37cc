//! `collapse validate`: the invariant suite. Runs Hermiticity, linearity,
//! unitarity, conservation-law, and dense-oracle checks at small sizes,
//! prints one pass/fail line per check, writes a JSON report, and signals
//! failure through the exit code.

use crate::config::RootConfig;
use crate::output;
use anyhow::Result;
use collapse_core::experiment::prepare_initial_state;
use collapse_core::hilbert::StateVector;
use collapse_core::model::{build_couplings, magnetization_field, HamiltonianKernel, ModelConfig};
use collapse_core::rng::{stream_rng, uniform_symmetric, Stream};
use collapse_core::solvers::chebyshev::chebyshev_step;
use collapse_core::solvers::evolve::{evolve, FieldUpdate, TrajectoryConfig};
use collapse_core::solvers::lanczos::lanczos_ground_state;
use collapse_core::{C64, Error};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Serialize)]
pub struct ValidateReport<'a> {
    pub artifact: output::ArtifactInfo,
    pub conventions: output::Conventions,
    pub config: &'a RootConfig,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

fn random_state(sites: usize, seed: u64) -> StateVector {
    let mut rng = stream_rng(seed, Stream::LanczosStart);
    let mut v = StateVector::zero(sites);
    for a in v.amplitudes_mut() {
        *a = C64::new(
            uniform_symmetric(&mut rng, 1.0),
            uniform_symmetric(&mut rng, 1.0),
        );
    }
    v.normalize();
    v
}

fn small_model(n_e: usize, mu: f64) -> ModelConfig {
    ModelConfig {
        n_a: 4,
        n_e,
        gamma: 0.1,
        delta: 0.3,
        omega: 0.8,
        theta: 0.5,
        mu,
    }
}

pub fn execute(config: &RootConfig, out_dir: &Path) -> Result<bool> {
    let mut checks = Vec::new();
    let cheb = config.chebyshev_config();

    // Frozen-field Hermiticity on random vectors (L = 9).
    {
        let c = build_couplings(&small_model(4, 12.0), 7).map_err(anyhow::Error::new)?;
        let kernel = HamiltonianKernel::new(&c);
        let mut worst = 0.0f64;
        for seed in 0..4u64 {
            let psi = random_state(c.num_sites(), 100 + seed);
            let phi = random_state(c.num_sites(), 200 + seed);
            let mut hpsi = StateVector::zero(c.num_sites());
            let mut hphi = StateVector::zero(c.num_sites());
            kernel.apply(-2.5, psi.amplitudes(), hpsi.amplitudes_mut());
            kernel.apply(-2.5, phi.amplitudes(), hphi.amplitudes_mut());
            let lhs = phi.inner(&hpsi).map_err(anyhow::Error::new)?;
            let rhs = psi.inner(&hphi).map_err(anyhow::Error::new)?.conj();
            worst = worst.max((lhs - rhs).norm());
        }
        checks.push(Check {
            name: "hermiticity".into(),
            passed: worst < 1e-12,
            measured: worst,
            threshold: 1e-12,
            detail: "max |<phi|H psi> - conj(<psi|H phi>)| over random vectors".into(),
        });
    }

    // Linearity of the Hamiltonian application.
    {
        let c = build_couplings(&small_model(4, 0.0), 9).map_err(anyhow::Error::new)?;
        let kernel = HamiltonianKernel::new(&c);
        let psi = random_state(c.num_sites(), 300);
        let phi = random_state(c.num_sites(), 301);
        let a = C64::new(0.3, -0.8);
        let b = C64::new(-1.1, 0.2);
        let combo = collapse_core::hilbert::axpy(
            a,
            &psi,
            &collapse_core::hilbert::scale(b, &phi),
        )
        .map_err(anyhow::Error::new)?;
        let mut h_combo = StateVector::zero(c.num_sites());
        let mut h_psi = StateVector::zero(c.num_sites());
        let mut h_phi = StateVector::zero(c.num_sites());
        kernel.apply(0.0, combo.amplitudes(), h_combo.amplitudes_mut());
        kernel.apply(0.0, psi.amplitudes(), h_psi.amplitudes_mut());
        kernel.apply(0.0, phi.amplitudes(), h_phi.amplitudes_mut());
        let mut worst = 0.0f64;
        for k in 0..c.dim() {
            let expect = a * h_psi.amplitudes()[k] + b * h_phi.amplitudes()[k];
            worst = worst.max((h_combo.amplitudes()[k] - expect).norm());
        }
        checks.push(Check {
            name: "linearity".into(),
            passed: worst < 1e-12,
            measured: worst,
            threshold: 1e-12,
            detail: "H(a psi + b phi) vs a H psi + b H phi".into(),
        });
    }

    // Unitarity of one Chebyshev step.
    {
        let c = build_couplings(&small_model(4, 12.0), 11).map_err(anyhow::Error::new)?;
        let mut worst = 0.0f64;
        for (seed, dt) in [(1u64, 0.05), (2, 0.1), (3, 0.5)] {
            let psi = random_state(c.num_sites(), 400 + seed);
            let field = magnetization_field(&psi, &c).map_err(anyhow::Error::new)?;
            let out = chebyshev_step(&c, field, &psi, dt, &cheb).map_err(anyhow::Error::new)?;
            worst = worst.max((out.norm() - 1.0).abs());
        }
        checks.push(Check {
            name: "unitarity".into(),
            passed: worst < 1e-12,
            measured: worst,
            threshold: 1e-12,
            detail: "norm drift of exp(-i dt H_frozen) on random states".into(),
        });
    }

    // Lanczos ground energy vs dense diagonalization (N_E = 8).
    {
        let c = build_couplings(&small_model(8, 0.0), 13).map_err(anyhow::Error::new)?;
        let kernel = HamiltonianKernel::environment_only(&c);
        let (e_lanczos, _) = lanczos_ground_state(
            |v, o| kernel.apply(0.0, v, o),
            1 << 8,
            &config.lanczos_config(),
        )
        .map_err(anyhow::Error::new)?;
        let h = collapse_oracle::dense_environment_hamiltonian(&c);
        let (e_dense, _) = collapse_oracle::dense_ground_state(&h);
        let err = (e_lanczos - e_dense).abs();
        checks.push(Check {
            name: "lanczos_vs_dense".into(),
            passed: err < 1e-8,
            measured: err,
            threshold: 1e-8,
            detail: format!("ground energy {e_lanczos:.9} vs dense {e_dense:.9}"),
        });
    }

    // Chebyshev step vs dense matrix exponential (L = 8).
    {
        let c = build_couplings(&small_model(3, 0.0), 17).map_err(anyhow::Error::new)?;
        let psi = random_state(c.num_sites(), 500);
        let stepped = chebyshev_step(
            &c,
            magnetization_field(&psi, &c).map_err(anyhow::Error::new)?,
            &psi,
            0.1,
            &cheb,
        )
        .map_err(anyhow::Error::new)?;
        let h = collapse_oracle::dense_hamiltonian(&c);
        let dense = collapse_oracle::DensePropagator::new(&h).apply(psi.amplitudes(), 0.1);
        let mut worst = 0.0f64;
        for k in 0..c.dim() {
            worst = worst.max((dense[k] - stepped.amplitudes()[k]).norm());
        }
        checks.push(Check {
            name: "chebyshev_vs_dense_expm".into(),
            passed: worst < 1e-8,
            measured: worst,
            threshold: 1e-8,
            detail: "max amplitude deviation, L = 8 random instance".into(),
        });
    }

    // Conservation gates over a short nonlinear trajectory (L = 10).
    {
        let model = small_model(5, 12.0);
        let c = build_couplings(&model, 19).map_err(anyhow::Error::new)?;
        let env_kernel = HamiltonianKernel::environment_only(&c);
        let (_, env) = lanczos_ground_state(
            |v, o| env_kernel.apply(0.0, v, o),
            1 << 5,
            &config.lanczos_config(),
        )
        .map_err(anyhow::Error::new)?;
        let psi0 = prepare_initial_state(std::f64::consts::FRAC_PI_4, 0.0, &c, &env)
            .map_err(anyhow::Error::new)?;
        let traj = TrajectoryConfig {
            t_max: 5.0,
            ..config.trajectory_config()
        };
        match evolve(&c, &psi0, &traj, &cheb, |_| {}) {
            Ok(out) => {
                checks.push(Check {
                    name: "norm_conservation".into(),
                    passed: out.stats.max_norm_drift < traj.norm_tolerance,
                    measured: out.stats.max_norm_drift,
                    threshold: traj.norm_tolerance,
                    detail: "max |norm - 1| over a mu = 12 trajectory to t = 5".into(),
                });
                checks.push(Check {
                    name: "universe_energy_conservation".into(),
                    passed: out.stats.max_energy_drift < traj.energy_tolerance,
                    measured: out.stats.max_energy_drift,
                    threshold: traj.energy_tolerance,
                    detail: "max relative E_U drift with the midpoint field".into(),
                });
            }
            Err(e) => {
                checks.push(Check {
                    name: "trajectory_gates".into(),
                    passed: false,
                    measured: f64::NAN,
                    threshold: 0.0,
                    detail: format!("short trajectory aborted: {e}"),
                });
            }
        }

        // Deliberately broken configuration: a frozen-start field at a huge
        // step leaks E_U and the integrity gate must catch it.
        let broken = TrajectoryConfig {
            dt: 10.0,
            t_max: 50.0,
            field_update: FieldUpdate::FrozenStart,
            ..config.trajectory_config()
        };
        let caught = match evolve(&c, &psi0, &broken, &cheb, |_| {}) {
            Err(Error::Integrity { what, drift, .. }) => {
                format!("caught as expected: {what} drift {drift:.3e}")
            }
            Err(other) => format!("caught with a different diagnostic: {other}"),
            Ok(_) => String::new(),
        };
        checks.push(Check {
            name: "broken_config_detected".into(),
            passed: !caught.is_empty(),
            measured: if caught.is_empty() { 0.0 } else { 1.0 },
            threshold: 1.0,
            detail: if caught.is_empty() {
                "dt = 10 frozen-start run was NOT rejected".into()
            } else {
                caught
            },
        });
    }

    let all_passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!(
            "{} {}: measured {:.3e} (threshold {:.1e}) — {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold,
            c.detail
        );
    }
    let report = ValidateReport {
        artifact: Default::default(),
        conventions: Default::default(),
        config,
        checks,
        all_passed,
    };
    output::write_json(&out_dir.join("validate_report.json"), &report)?;
    println!(
        "validate: {} — wrote {}",
        if all_passed { "all checks passed" } else { "FAILURES present" },
        out_dir.join("validate_report.json").display()
    );
    Ok(all_passed)
}
