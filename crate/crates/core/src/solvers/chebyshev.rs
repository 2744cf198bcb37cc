//! Chebyshev-expansion evaluation of the short-time propagator
//! `exp(-i dt H)` for a Hamiltonian with a per-step frozen field.
//!
//! With the spectrum rescaled into `[-1, 1]` by an upper bound `R` on the
//! spectral radius, the propagator expands as
//!
//! ```text
//! exp(-i x H/R) = Σ_k (2 - δ_k0) (-i)^k J_k(x) T_k(H/R),   x = R dt,
//! ```
//!
//! where `J_k` are integer-order Bessel functions and the Chebyshev vectors
//! obey the three-term recurrence `T_{k+1} = 2 (H/R) T_k - T_{k-1}`. The
//! series is truncated at the first order whose Bessel tail drops below the
//! configured tolerance; the factorial decay of `J_k(x)` for `k > x` makes
//! the step unitary to that tolerance.

use crate::error::{config as config_err, Error, Result};
use crate::hilbert::{StateVector, C64};
use crate::math;
use crate::model::{CouplingSet, FieldValue, HamiltonianKernel};
use alloc::vec;
use alloc::vec::Vec;

/// Truncation control for the propagator expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebyshevConfig {
    /// Include orders until `|J_K(R dt)|` falls below this.
    pub truncation_tolerance: f64,
    /// Hard cap on the expansion order.
    pub max_order: usize,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        ChebyshevConfig {
            truncation_tolerance: 1e-15,
            max_order: 4096,
        }
    }
}

impl ChebyshevConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_tolerance > 0.0) {
            return Err(config_err("chebyshev.truncation_tolerance must be > 0"));
        }
        if self.max_order < 1 {
            return Err(config_err("chebyshev.max_order must be >= 1"));
        }
        Ok(())
    }
}

/// Bessel functions `J_0(x) ... J_K(x)` by Miller's downward recurrence,
/// truncated at the largest order with `|J_k| >= tol`.
///
/// Returns the coefficient table and implicitly its length `K + 1`.
pub fn bessel_j_table(x: f64, tol: f64, max_order: usize) -> Result<Vec<f64>> {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return Ok(vec![1.0]);
    }
    // Overshoot of the truncation order; trimmed after normalization.
    let k_est = x + 10.0 * libm::cbrt(x) + 24.0;
    if k_est > 16.0 * max_order as f64 + 64.0 {
        return Err(Error::OrderExceeded {
            required: k_est as usize,
            max_order,
        });
    }
    // Start the downward recurrence well above the last kept order.
    let start = (k_est + 16.0 + 2.0 * math::sqrt(k_est)) as usize;
    let start = start + (start & 1); // even
    let mut j = vec![0.0f64; start + 2];
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    let mut k = start;
    while k > 0 {
        j[k - 1] = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        if math::abs(j[k - 1]) > 1e280 {
            let inv = 1e-280;
            for v in j[k - 1..].iter_mut() {
                *v *= inv;
            }
        }
        k -= 1;
    }
    // Normalization: J_0 + 2 Σ J_{2m} = 1.
    let mut s = j[0];
    let mut m = 2;
    while m <= start {
        s += 2.0 * j[m];
        m += 2;
    }
    let inv = 1.0 / s;
    for v in j.iter_mut() {
        *v *= inv;
    }
    // Trim to the last order at or above tolerance.
    let mut last = 0;
    for (k, v) in j.iter().enumerate() {
        if math::abs(*v) >= tol {
            last = k;
        }
    }
    if last > max_order {
        return Err(Error::OrderExceeded {
            required: last,
            max_order,
        });
    }
    j.truncate(last + 1);
    Ok(j)
}

/// Reusable buffers for the three-term recurrence.
pub struct ChebWorkspace {
    t_prev: Vec<C64>,
    t_cur: Vec<C64>,
    t_next: Vec<C64>,
}

impl ChebWorkspace {
    pub fn new(dim: usize) -> Self {
        ChebWorkspace {
            t_prev: vec![C64::new(0.0, 0.0); dim],
            t_cur: vec![C64::new(0.0, 0.0); dim],
            t_next: vec![C64::new(0.0, 0.0); dim],
        }
    }
}

/// `out = exp(-i dt (H_linear + field_coeff M_z)) psi`, with `r` a valid
/// upper bound on the spectral radius of the bracket. Returns the expansion
/// order used.
pub fn step_into(
    kernel: &HamiltonianKernel,
    field_coeff: f64,
    r: f64,
    psi: &[C64],
    out: &mut [C64],
    dt: f64,
    cfg: &ChebyshevConfig,
    ws: &mut ChebWorkspace,
) -> Result<usize> {
    let x = r * dt;
    if x == 0.0 {
        out.copy_from_slice(psi);
        return Ok(0);
    }
    let bessel = bessel_j_table(x, cfg.truncation_tolerance, cfg.max_order)?;
    let order = bessel.len() - 1;

    // (-i)^k cycle times (2 - δ_k0) J_k.
    let coeff = |k: usize| -> C64 {
        let w = if k == 0 { 1.0 } else { 2.0 } * bessel[k];
        match k % 4 {
            0 => C64::new(w, 0.0),
            1 => C64::new(0.0, -w),
            2 => C64::new(-w, 0.0),
            _ => C64::new(0.0, w),
        }
    };

    // T_0 = psi.
    ws.t_prev.copy_from_slice(psi);
    math::scaled_copy(out, psi, 0.0);
    math::accumulate(out, &ws.t_prev, coeff(0));
    if order == 0 {
        return Ok(0);
    }
    // T_1 = (H/R) psi.
    kernel.apply(field_coeff, psi, &mut ws.t_cur);
    let inv_r = 1.0 / r;
    for v in ws.t_cur.iter_mut() {
        *v *= inv_r;
    }
    math::accumulate(out, &ws.t_cur, coeff(1));

    for k in 2..=order {
        // T_k = 2 (H/R) T_{k-1} - T_{k-2}, built in t_next.
        kernel.apply(field_coeff, &ws.t_cur, &mut ws.t_next);
        math::recurrence_update(&mut ws.t_next, &ws.t_prev, 2.0 * inv_r);
        math::accumulate(out, &ws.t_next, coeff(k));
        // Rotate buffers.
        core::mem::swap(&mut ws.t_prev, &mut ws.t_cur);
        core::mem::swap(&mut ws.t_cur, &mut ws.t_next);
    }
    Ok(order)
}

/// One frozen-field propagator step `exp(-i dt H_frozen) psi` where
/// `H_frozen = H_linear + H_B(frozen_field)`.
pub fn chebyshev_step(
    c: &CouplingSet,
    frozen_field: FieldValue,
    psi: &StateVector,
    dt: f64,
    cfg: &ChebyshevConfig,
) -> Result<StateVector> {
    cfg.validate()?;
    if psi.sites() != c.num_sites() {
        return Err(crate::error::usage(
            "state dimension does not match coupling set",
        ));
    }
    let kernel = HamiltonianKernel::new(c);
    let field_coeff = -c.config.mu * frozen_field.b_tilde;
    let r = kernel.bound_with_field(field_coeff);
    let mut ws = ChebWorkspace::new(psi.dim());
    let mut out = StateVector::zero(psi.sites());
    step_into(
        &kernel,
        field_coeff,
        r,
        psi.amplitudes(),
        out.amplitudes_mut(),
        dt,
        cfg,
        &mut ws,
    )?;
    Ok(out)
}
