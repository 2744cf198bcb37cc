//! The outer nonlinear evolution loop.
//!
//! Each step advances the state by `exp(-i dt H_frozen)` where
//! `H_frozen = H_linear + H_B(b̄)` holds the self-field coefficient `b̄`
//! constant, making every step a linear unitary that the Chebyshev
//! propagator evaluates to machine precision.
//!
//! Two rules for choosing `b̄` are available:
//!
//! * [`FieldUpdate::SelfConsistentMidpoint`] (default): `b̄` solves
//!   `b̄ = (b̃(t) + b̃(t+dt)) / 2` by a slope-tracking secant iteration.
//!   With the exact step identity `Δ⟨H_linear⟩ = μ b̄ Δb̃`, this choice
//!   cancels the universe-energy change to the fixed-point tolerance, so
//!   `E_U` is conserved independent of `dt`.
//! * [`FieldUpdate::FrozenStart`]: `b̄ = b̃(t)`. One propagator application
//!   per step, but `E_U` leaks at a rate `~ μ (Δb̃)² / (2 dt)`, which the
//!   energy gate will catch on collapsing trajectories.
//!
//! The spectral bound is recomputed for each frozen field value from the
//! exact diagonal range, so no a-priori field cap enters the rescaling.

use crate::error::{Error, Result};
use crate::hilbert::{StateVector, C64};
use crate::math;
use crate::model::{CouplingSet, HamiltonianKernel};
use crate::observables::{self, ObservableRecord};
use crate::solvers::chebyshev::{self, ChebWorkspace, ChebyshevConfig};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Rule for freezing the self-field within a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldUpdate {
    SelfConsistentMidpoint,
    FrozenStart,
}

/// Time-integration controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    /// Step size in units of ħ/J.
    pub dt: f64,
    pub t_max: f64,
    /// Observables are evaluated every this many steps (and at the end).
    pub record_stride: usize,
    /// Abort when `|norm - 1|` exceeds this (checked every step).
    pub norm_tolerance: f64,
    /// Abort when the relative `E_U` drift exceeds this (checked at record
    /// points; relative to `max(|E_U(0)|, 1)`).
    pub energy_tolerance: f64,
    /// Convergence tolerance of the midpoint field iteration.
    pub field_tolerance: f64,
    pub max_field_iterations: usize,
    pub field_update: FieldUpdate,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            dt: 0.05,
            t_max: 200.0,
            record_stride: 5,
            norm_tolerance: 1e-9,
            energy_tolerance: 1e-6,
            field_tolerance: 1e-10,
            max_field_iterations: 24,
            field_update: FieldUpdate::SelfConsistentMidpoint,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(crate::error::config("trajectory.dt must be > 0"));
        }
        if self.t_max < self.dt {
            return Err(crate::error::config("trajectory.t_max must be >= dt"));
        }
        if self.record_stride < 1 {
            return Err(crate::error::config("trajectory.record_stride must be >= 1"));
        }
        if !(self.norm_tolerance > 0.0) || !(self.energy_tolerance > 0.0) {
            return Err(crate::error::config(
                "trajectory tolerances must be positive",
            ));
        }
        if !(self.field_tolerance > 0.0) || self.max_field_iterations < 1 {
            return Err(crate::error::config(
                "trajectory.field_tolerance must be > 0 and max_field_iterations >= 1",
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_max / self.dt) + 0.5) as usize
    }
}

/// Solver counters for performance reporting.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvolveStats {
    pub steps: usize,
    pub kernel_applies: usize,
    pub propagator_applications: usize,
    pub max_chebyshev_order: usize,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    /// How often the estimated flip-norm bound was abandoned for the
    /// certified triangle bound after a norm-change detection.
    pub bound_fallbacks: usize,
}

/// Full recorded trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub records: Vec<ObservableRecord>,
    pub stats: EvolveStats,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &ObservableRecord {
        self.records.last().expect("trajectory has at least one record")
    }
}

/// Evolve `psi0` under the full nonlinear Hamiltonian, recording
/// observables every `record_stride` steps and invoking `observer` on each
/// record. Aborts with an integrity error if the norm or `E_U` drifts
/// beyond tolerance.
pub fn evolve(
    c: &CouplingSet,
    psi0: &StateVector,
    traj: &TrajectoryConfig,
    cheb: &ChebyshevConfig,
    mut observer: impl FnMut(&ObservableRecord),
) -> Result<TrajectoryRecord> {
    traj.validate()?;
    cheb.validate()?;
    if psi0.sites() != c.num_sites() {
        return Err(crate::error::usage(
            "initial state dimension does not match coupling set",
        ));
    }

    let kernel = HamiltonianKernel::new(c);
    let mu = c.config.mu;
    let half_na = c.config.n_a as f64 * 0.5;
    let dim = psi0.dim();
    let mut ws = ChebWorkspace::new(dim);
    let mut psi: Vec<C64> = psi0.amplitudes().to_vec();
    let mut psi_next = vec![C64::new(0.0, 0.0); dim];
    let mut scratch = vec![C64::new(0.0, 0.0); dim];
    let mut stats = EvolveStats::default();

    let (f0, n0) = kernel.field_and_norm_sqr(&psi);
    let mut b0 = f0 / n0;
    let mut norm = math::sqrt(n0);
    let mut b_prev_start = b0;

    let mut records: Vec<ObservableRecord> = Vec::new();
    let e_u0 = observables::universe_energy_with(c, &kernel, &psi, &mut scratch);
    let energy_denom = math::abs(e_u0).max(1.0);
    let record =
        |psi: &[C64], t: f64, b: f64, norm: f64, scratch: &mut [C64], stats: &mut EvolveStats,
         records: &mut Vec<ObservableRecord>, observer: &mut dyn FnMut(&ObservableRecord)|
         -> Result<()> {
            let sv = StateVector::from_amplitudes(
                (dim.trailing_zeros()) as usize,
                psi.to_vec(),
            )?;
            let e_exch = observables::exchange_energy(c, &sv)?;
            let s_sys_z = observables::system_spin_z(&sv);
            let e_u = observables::universe_energy_with(c, &kernel, psi, scratch);
            stats.kernel_applies += 1;
            let rec = ObservableRecord {
                t,
                m: b,
                e_exch,
                s_sys_z,
                b_tilde: b,
                norm,
                e_u,
            };
            let drift = math::abs(e_u - e_u0) / energy_denom;
            stats.max_energy_drift = stats.max_energy_drift.max(drift);
            records.push(rec);
            observer(&rec);
            Ok(())
        };

    record(&psi, 0.0, b0, norm, &mut scratch, &mut stats, &mut records, &mut observer)?;
    if math::abs(norm - 1.0) > traj.norm_tolerance {
        return Err(Error::Integrity {
            what: String::from("initial state norm"),
            step: 0,
            t: 0.0,
            drift: math::abs(norm - 1.0),
            tolerance: traj.norm_tolerance,
        });
    }

    let steps = traj.steps();
    // Secant slope of the midpoint mismatch; near -1 for small `μ dt`.
    let mut slope = -1.0f64;
    // Spectral bound of the flip part: a Lanczos estimate with a 10%
    // margin, demoted to the certified triangle bound if a propagator
    // application ever changes the norm by more than the detector
    // threshold (which a valid bound cannot).
    let flip_certified = kernel.flip_bound();
    let mut flip_norm = (1.10 * kernel.flip_norm_estimate(40)).min(flip_certified);
    let detector = 1e3 * cheb.truncation_tolerance;
    // One step's history of field start values for the quadratic midpoint
    // predictor.
    let mut b_prev2 = b0;

    for step in 1..=steps {
        let t = step as f64 * traj.dt;

        // One guarded propagator application: retries once with the
        // certified bound if the norm moved suspiciously.
        let guarded_apply = |b_bar: f64,
                                 flip_norm: &mut f64,
                                 psi: &[C64],
                                 psi_next: &mut [C64],
                                 ws: &mut ChebWorkspace,
                                 stats: &mut EvolveStats|
         -> Result<(f64, f64)> {
            loop {
                let field_coeff = -mu * b_bar;
                let r = kernel.diag_field_max(field_coeff) + *flip_norm;
                let order = chebyshev::step_into(
                    &kernel, field_coeff, r, psi, psi_next, traj.dt, cheb, ws,
                )?;
                stats.kernel_applies += order;
                stats.propagator_applications += 1;
                stats.max_chebyshev_order = stats.max_chebyshev_order.max(order);
                let (fsum, n2) = kernel.field_and_norm_sqr(psi_next);
                if *flip_norm < flip_certified && math::abs(math::sqrt(n2) - norm) > detector {
                    *flip_norm = flip_certified;
                    stats.bound_fallbacks += 1;
                    continue;
                }
                return Ok((fsum / n2, n2));
            }
        };

        let (b1, n2) = if mu == 0.0 || traj.field_update == FieldUpdate::FrozenStart {
            guarded_apply(b0, &mut flip_norm, &psi, &mut psi_next, &mut ws, &mut stats)?
        } else {
            // Self-consistent midpoint: solve f(b̄) = (b0 + b̃₁(b̄))/2 - b̄ = 0.
            let predictor = if step >= 3 {
                (15.0 * b0 - 10.0 * b_prev_start + 3.0 * b_prev2) / 8.0
            } else if step == 2 {
                b0 + 0.5 * (b0 - b_prev_start)
            } else {
                b0
            };
            let mut b_bar = predictor.clamp(-half_na, half_na);
            let mut last: Option<(f64, f64)> = None;
            let mut converged = None;
            for _ in 0..traj.max_field_iterations {
                let (b1, n2) =
                    guarded_apply(b_bar, &mut flip_norm, &psi, &mut psi_next, &mut ws, &mut stats)?;
                let f = 0.5 * (b0 + b1) - b_bar;
                if math::abs(f) <= traj.field_tolerance {
                    converged = Some((b1, n2));
                    break;
                }
                if let Some((pb, pf)) = last {
                    let db = b_bar - pb;
                    if math::abs(db) > 1e-15 {
                        let s = (f - pf) / db;
                        if s.is_finite() && (-4.0..=-0.25).contains(&s) {
                            slope = s;
                        }
                    }
                }
                last = Some((b_bar, f));
                b_bar = (b_bar - f / slope).clamp(-half_na, half_na);
            }
            match converged {
                Some(v) => v,
                None => {
                    return Err(Error::Convergence {
                        what: alloc::format!(
                            "self-consistent midpoint field at step {step} (t = {t})"
                        ),
                        best_residual: last.map(|(_, f)| math::abs(f)).unwrap_or(f64::NAN),
                        iterations: traj.max_field_iterations,
                    })
                }
            }
        };

        core::mem::swap(&mut psi, &mut psi_next);
        b_prev2 = b_prev_start;
        b_prev_start = b0;
        b0 = b1;
        norm = math::sqrt(n2);
        let norm_drift = math::abs(norm - 1.0);
        stats.max_norm_drift = stats.max_norm_drift.max(norm_drift);
        if norm_drift > traj.norm_tolerance {
            return Err(Error::Integrity {
                what: String::from("wavefunction norm"),
                step,
                t,
                drift: norm_drift,
                tolerance: traj.norm_tolerance,
            });
        }

        if step % traj.record_stride == 0 || step == steps {
            record(&psi, t, b0, norm, &mut scratch, &mut stats, &mut records, &mut observer)?;
            let drift = stats.max_energy_drift;
            if drift > traj.energy_tolerance {
                return Err(Error::Integrity {
                    what: String::from("universe energy E_U"),
                    step,
                    t,
                    drift,
                    tolerance: traj.energy_tolerance,
                });
            }
        }
    }

    stats.steps = steps;
    Ok(TrajectoryRecord { records, stats })
}
