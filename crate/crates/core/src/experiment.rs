//! Measurement experiments: initial-state preparation, collapse
//! classification of trajectories, single seeded runs, and Born-rule
//! ensemble statistics.

use crate::error::{config as config_err, usage, Result};
use crate::hilbert::{tensor_product, StateVector, C64};
use crate::math;
use crate::model::{build_couplings, CouplingSet, HamiltonianKernel, ModelConfig};
use crate::rng::derive_seed;
use crate::solvers::chebyshev::ChebyshevConfig;
use crate::solvers::evolve::{evolve, TrajectoryConfig, TrajectoryRecord};
use crate::solvers::lanczos::{lanczos_ground_state, LanczosConfig};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Collapse classification thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeCriteria {
    /// Magnitude the magnetization must sustain to count as collapsed.
    pub m_threshold: f64,
    /// Minimum length of the sustained terminal window (units of ħ/J).
    pub dwell: f64,
}

impl OutcomeCriteria {
    /// Half of full polarization, dwell of 20 exchange times.
    pub fn defaults_for(n_a: usize) -> Self {
        OutcomeCriteria {
            m_threshold: 0.5 * (n_a as f64 * 0.5),
            dwell: 20.0,
        }
    }
}

/// Everything needed to reproduce one measurement simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSpec {
    /// Preparation angle of the measured spin, radians in `[0, π/2]`.
    pub theta: f64,
    /// Preparation phase, radians (not important for the physics; default 0).
    pub phi: f64,
    /// Seed of the random coupling realization.
    pub coupling_seed: u64,
    /// Seed of the Lanczos start vector (selects the environment state).
    pub lanczos_seed: u64,
    pub model: ModelConfig,
    pub trajectory: TrajectoryConfig,
    pub chebyshev: ChebyshevConfig,
    pub lanczos: LanczosConfig,
    pub outcome: OutcomeCriteria,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    CollapsedUp,
    CollapsedDown,
    Undecided,
}

/// Verdict for one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOutcome {
    pub classification: Classification,
    /// Start of the sustained terminal window, when collapsed.
    pub collapse_time: Option<f64>,
    pub final_m: f64,
    pub final_s_sys_z: f64,
}

/// `|Ψ(0)⟩ = (cosθ |↑⟩ + sinθ e^{iφ} |↓⟩) ⊗ |↑↓…↑↓⟩ ⊗ |E_0⟩`.
///
/// The apparatus starts in the alternating antiferromagnetic state, so its
/// magnetization is exactly zero; `env_ground` is the prepared environment
/// state (normally a Lanczos ground state of the spin-glass Hamiltonian).
pub fn prepare_initial_state(
    theta: f64,
    phi: f64,
    c: &CouplingSet,
    env_ground: &StateVector,
) -> Result<StateVector> {
    if c.config.n_a % 2 != 0 {
        return Err(config_err(
            "alternating apparatus state requires an even number of apparatus spins",
        ));
    }
    if env_ground.sites() != c.config.n_e {
        return Err(usage("environment state dimension mismatch"));
    }
    let mut sys = StateVector::zero(1);
    sys.amplitudes_mut()[1] = C64::new(math::cos(theta), 0.0);
    sys.amplitudes_mut()[0] = C64::new(math::cos(phi), math::sin(phi)) * math::sin(theta);

    let mut app_bits = 0usize;
    for k in (0..c.config.n_a).step_by(2) {
        app_bits |= 1 << k;
    }
    let app = StateVector::basis(c.config.n_a, app_bits)?;
    tensor_product(&sys, &app, env_ground)
}

/// Scan a trajectory for a sustained terminal magnetization plateau.
///
/// Finds the earliest time after which `sign(M)` is constant and
/// `|M| >= m_threshold` all the way to the end of the trajectory; the run
/// is collapsed if that terminal window is at least `dwell` long.
pub fn classify_outcome(traj: &TrajectoryRecord, criteria: &OutcomeCriteria) -> RunOutcome {
    let records = &traj.records;
    let last = match records.last() {
        Some(r) => *r,
        None => {
            return RunOutcome {
                classification: Classification::Undecided,
                collapse_time: None,
                final_m: f64::NAN,
                final_s_sys_z: f64::NAN,
            }
        }
    };
    let outcome_undecided = RunOutcome {
        classification: Classification::Undecided,
        collapse_time: None,
        final_m: last.m,
        final_s_sys_z: last.s_sys_z,
    };
    if !(math::abs(last.m) >= criteria.m_threshold) {
        return outcome_undecided;
    }
    let sign_up = last.m > 0.0;
    let mut window_start = last.t;
    for r in records.iter().rev() {
        if (r.m > 0.0) == sign_up && math::abs(r.m) >= criteria.m_threshold {
            window_start = r.t;
        } else {
            break;
        }
    }
    if last.t - window_start >= criteria.dwell {
        RunOutcome {
            classification: if sign_up {
                Classification::CollapsedUp
            } else {
                Classification::CollapsedDown
            },
            collapse_time: Some(window_start),
            final_m: last.m,
            final_s_sys_z: last.s_sys_z,
        }
    } else {
        outcome_undecided
    }
}

/// The deterministic preparation stage of one run: coupling realization,
/// environment ground state, and the initial product state.
pub struct PreparedRun {
    pub couplings: CouplingSet,
    pub environment_energy: f64,
    pub environment_state: StateVector,
    pub initial_state: StateVector,
}

/// Build couplings and prepare `|Ψ(0)⟩` for a run specification.
pub fn prepare_run(spec: &RunSpec) -> Result<PreparedRun> {
    let couplings = build_couplings(&spec.model, spec.coupling_seed)?;
    let env_kernel = HamiltonianKernel::environment_only(&couplings);
    let lanczos_cfg = LanczosConfig {
        start_seed: spec.lanczos_seed,
        ..spec.lanczos
    };
    let (environment_energy, environment_state) = lanczos_ground_state(
        |v, out| env_kernel.apply(0.0, v, out),
        1usize << spec.model.n_e,
        &lanczos_cfg,
    )?;
    let initial_state =
        prepare_initial_state(spec.theta, spec.phi, &couplings, &environment_state)?;
    Ok(PreparedRun {
        couplings,
        environment_energy,
        environment_state,
        initial_state,
    })
}

/// Build couplings, prepare the environment ground state and the initial
/// product state, evolve, classify. Deterministic given the two seeds.
pub fn run_single(spec: &RunSpec) -> Result<(TrajectoryRecord, RunOutcome)> {
    run_single_observed(spec, |_| {})
}

/// [`run_single`] with a per-record observer callback.
pub fn run_single_observed(
    spec: &RunSpec,
    observer: impl FnMut(&crate::observables::ObservableRecord),
) -> Result<(TrajectoryRecord, RunOutcome)> {
    let prepared = prepare_run(spec)?;
    let traj = evolve(
        &prepared.couplings,
        &prepared.initial_state,
        &spec.trajectory,
        &spec.chebyshev,
        observer,
    )?;
    let outcome = classify_outcome(&traj, &spec.outcome);
    Ok((traj, outcome))
}

/// `P_↑(θ) = cos²θ`, the ideal-measurement reference curve.
pub fn predicted_probability(theta: f64) -> f64 {
    let c = math::cos(theta);
    c * c
}

/// Wilson 95% score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Aggregated statistics for one preparation angle.
#[derive(Clone, Debug, PartialEq)]
pub struct BornPoint {
    pub theta: f64,
    pub n_runs: usize,
    pub n_up: usize,
    pub n_down: usize,
    pub n_undecided: usize,
    pub n_failed: usize,
    /// `n_up / (n_up + n_down)`; undecided and failed runs are excluded.
    pub p_up_estimate: Option<f64>,
    /// Wilson 95% interval on the decided runs.
    pub ci95: (f64, f64),
    /// `cos²θ`.
    pub reference: f64,
}

/// Per-run record inside an ensemble (kept for reproducibility audits).
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRun {
    pub theta_index: usize,
    pub run_index: usize,
    pub coupling_seed: u64,
    pub lanczos_seed: u64,
    pub outcome: Option<RunOutcome>,
    pub error: Option<String>,
}

/// A full Born-statistics ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct BornCurve {
    pub points: Vec<BornPoint>,
    pub runs: Vec<EnsembleRun>,
}

/// Seed pair for ensemble member `(theta_index, run_index)` derived from
/// `base_seed` by the documented counter scheme.
pub fn ensemble_seeds(base_seed: u64, theta_index: usize, run_index: usize) -> (u64, u64) {
    let counter = ((theta_index as u64) << 24 | run_index as u64) << 1;
    (
        derive_seed(base_seed, counter),
        derive_seed(base_seed, counter | 1),
    )
}

/// Run `runs_per_theta` independent simulations for each angle and
/// aggregate Born statistics. Every run draws a fresh coupling realization
/// and a fresh environment state from seeds derived deterministically from
/// `base_seed`; failures are recorded per run and the ensemble continues.
///
/// `template` supplies everything except `theta` and the seeds. `on_run`
/// is invoked for every completed run (ensemble order is deterministic;
/// with the `parallel` feature runs execute concurrently).
pub fn born_curve_with<F>(
    thetas: &[f64],
    runs_per_theta: usize,
    base_seed: u64,
    template: &RunSpec,
    on_run: F,
) -> Result<BornCurve>
where
    F: Fn(usize, usize, &TrajectoryRecord, &RunOutcome) + Sync,
{
    if runs_per_theta < 1 {
        return Err(config_err("runs_per_theta must be >= 1"));
    }
    if thetas.is_empty() {
        return Err(config_err("theta grid must not be empty"));
    }
    let jobs: Vec<(usize, usize)> = (0..thetas.len())
        .flat_map(|ti| (0..runs_per_theta).map(move |ri| (ti, ri)))
        .collect();

    let run_one = |&(ti, ri): &(usize, usize)| -> EnsembleRun {
        let (coupling_seed, lanczos_seed) = ensemble_seeds(base_seed, ti, ri);
        let spec = RunSpec {
            theta: thetas[ti],
            coupling_seed,
            lanczos_seed,
            ..*template
        };
        match run_single(&spec) {
            Ok((traj, outcome)) => {
                on_run(ti, ri, &traj, &outcome);
                EnsembleRun {
                    theta_index: ti,
                    run_index: ri,
                    coupling_seed,
                    lanczos_seed,
                    outcome: Some(outcome),
                    error: None,
                }
            }
            Err(e) => EnsembleRun {
                theta_index: ti,
                run_index: ri,
                coupling_seed,
                lanczos_seed,
                outcome: None,
                error: Some(e.to_string()),
            },
        }
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<EnsembleRun> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<EnsembleRun> = jobs.iter().map(run_one).collect();

    let mut points = Vec::with_capacity(thetas.len());
    for (ti, &theta) in thetas.iter().enumerate() {
        let mut n_up = 0;
        let mut n_down = 0;
        let mut n_undecided = 0;
        let mut n_failed = 0;
        for r in runs.iter().filter(|r| r.theta_index == ti) {
            match &r.outcome {
                Some(o) => match o.classification {
                    Classification::CollapsedUp => n_up += 1,
                    Classification::CollapsedDown => n_down += 1,
                    Classification::Undecided => n_undecided += 1,
                },
                None => n_failed += 1,
            }
        }
        let decided = n_up + n_down;
        points.push(BornPoint {
            theta,
            n_runs: runs_per_theta,
            n_up,
            n_down,
            n_undecided,
            n_failed,
            p_up_estimate: (decided > 0).then(|| n_up as f64 / decided as f64),
            ci95: wilson_interval(n_up, decided),
            reference: predicted_probability(theta),
        });
    }
    Ok(BornCurve { points, runs })
}

/// [`born_curve_with`] without a per-run callback.
pub fn born_curve(
    thetas: &[f64],
    runs_per_theta: usize,
    base_seed: u64,
    template: &RunSpec,
) -> Result<BornCurve> {
    born_curve_with(thetas, runs_per_theta, base_seed, template, |_, _, _, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::ObservableRecord;
    use crate::solvers::evolve::EvolveStats;

    fn synthetic_traj(ms: &[(f64, f64)]) -> TrajectoryRecord {
        TrajectoryRecord {
            records: ms
                .iter()
                .map(|&(t, m)| ObservableRecord {
                    t,
                    m,
                    e_exch: 0.0,
                    s_sys_z: 0.0,
                    b_tilde: m,
                    norm: 1.0,
                    e_u: 0.0,
                })
                .collect(),
            stats: EvolveStats::default(),
        }
    }

    fn criteria() -> OutcomeCriteria {
        OutcomeCriteria {
            m_threshold: 1.0,
            dwell: 20.0,
        }
    }

    #[test]
    fn constant_high_magnetization_collapses_at_zero() {
        let ms: alloc::vec::Vec<(f64, f64)> = (0..101).map(|k| (k as f64, 1.5)).collect();
        let traj = synthetic_traj(&ms);
        let out = classify_outcome(&traj, &criteria());
        assert_eq!(out.classification, Classification::CollapsedUp);
        assert_eq!(out.collapse_time, Some(0.0));
        assert_eq!(out.final_m, 1.5);
    }

    #[test]
    fn zero_magnetization_is_undecided() {
        let ms: alloc::vec::Vec<(f64, f64)> = (0..101).map(|k| (k as f64, 0.0)).collect();
        let out = classify_outcome(&synthetic_traj(&ms), &criteria());
        assert_eq!(out.classification, Classification::Undecided);
        assert_eq!(out.collapse_time, None);
    }

    #[test]
    fn repeated_crossings_classify_at_final_settling() {
        // Crosses ±threshold a few times, then settles at -1.2 from t = 60.
        let mut ms = alloc::vec::Vec::new();
        for k in 0..=100 {
            let t = k as f64;
            let m = if t < 20.0 {
                1.4 // early positive excursion
            } else if t < 30.0 {
                -1.3 // too-short negative window
            } else if t < 45.0 {
                0.4 // below threshold
            } else if t < 60.0 {
                -1.1
            } else if t < 61.0 {
                -0.9 // dips below threshold, breaking the earlier window
            } else {
                -1.2
            };
            ms.push((t, m));
        }
        let out = classify_outcome(&synthetic_traj(&ms), &criteria());
        assert_eq!(out.classification, Classification::CollapsedDown);
        assert_eq!(out.collapse_time, Some(61.0));

        // With a dwell longer than the terminal window it stays undecided.
        let strict = OutcomeCriteria {
            m_threshold: 1.0,
            dwell: 50.0,
        };
        let out = classify_outcome(&synthetic_traj(&ms), &strict);
        assert_eq!(out.classification, Classification::Undecided);
    }

    #[test]
    fn short_trajectory_never_collapses() {
        let ms: alloc::vec::Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 1.5)).collect();
        let out = classify_outcome(&synthetic_traj(&ms), &criteria());
        assert_eq!(out.classification, Classification::Undecided);
    }

    #[test]
    fn prepared_state_examples() {
        let cfg = ModelConfig {
            n_a: 4,
            n_e: 2,
            gamma: 0.1,
            delta: 0.3,
            omega: 0.8,
            theta: 0.5,
            mu: 12.0,
        };
        let c = build_couplings(&cfg, 1).unwrap();
        let env = StateVector::basis(2, 0b01).unwrap();

        // theta = 0: the system factor is exactly |↑⟩.
        let psi = prepare_initial_state(0.0, 0.0, &c, &env).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-14);
        let s = crate::observables::system_spin_z(&psi);
        assert!((s - 0.5).abs() < 1e-14);

        // theta = pi/4, phi = 0: equal real amplitudes.
        let psi = prepare_initial_state(core::f64::consts::FRAC_PI_4, 0.0, &c, &env).unwrap();
        assert!(crate::observables::system_spin_z(&psi).abs() < 1e-14);

        // Magnetization of the prepared state vanishes for any theta.
        for theta in [0.0, 0.3, core::f64::consts::FRAC_PI_2] {
            let psi = prepare_initial_state(theta, 0.4, &c, &env).unwrap();
            let m = crate::model::magnetization_field(&psi, &c).unwrap().b_tilde;
            assert!(m.abs() < 1e-14);
        }

        // A nonzero phi lands on the down amplitude.
        let psi = prepare_initial_state(core::f64::consts::FRAC_PI_4, 0.9, &c, &env).unwrap();
        let amp = psi.amplitudes();
        // Down amplitude of the system sits at even indices; pick the basis
        // state with the apparatus pattern and env |01⟩.
        let app_bits = 0b0101usize;
        let idx_down = (0b01usize << 5) | (app_bits << 1);
        let expect = C64::new((0.9f64).cos(), (0.9f64).sin())
            * (core::f64::consts::FRAC_PI_4).sin();
        assert!((amp[idx_down] - expect).norm() < 1e-14);
    }

    #[test]
    fn predicted_probability_values() {
        assert!((predicted_probability(0.0) - 1.0).abs() < 1e-15);
        assert!(predicted_probability(core::f64::consts::FRAC_PI_2) < 1e-30);
        assert!((predicted_probability(core::f64::consts::FRAC_PI_3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wilson_interval_reference_values() {
        // Cross-checked against an independent statistics library.
        let (lo, hi) = wilson_interval(48, 96);
        assert!((lo - 0.401924024529863).abs() < 1e-12);
        assert!((hi - 0.598075975470137).abs() < 1e-12);
        let (lo, hi) = wilson_interval(29, 32);
        assert!((lo - 0.757818452716121).abs() < 1e-12);
        assert!((hi - 0.967598448701634).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 8);
        assert!(lo == 0.0);
        assert!((hi - 0.324407564883880).abs() < 1e-12);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn ensemble_seed_scheme_is_injective_enough() {
        let mut seen = alloc::collections::BTreeSet::new();
        for ti in 0..8 {
            for ri in 0..64 {
                let (a, b) = ensemble_seeds(42, ti, ri);
                assert!(seen.insert(a));
                assert!(seen.insert(b));
            }
        }
    }
}
