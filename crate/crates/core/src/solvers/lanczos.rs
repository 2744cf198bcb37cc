//! Lanczos iteration for the lowest eigenpair of a Hermitian operator,
//! given only its action on a vector. Used to prepare the spin-glass
//! environment close to its ground state.

use crate::error::{usage, Error, Result};
use crate::hilbert::{StateVector, C64};
use crate::math;
use crate::rng::{stream_rng, uniform_symmetric, Stream};
use crate::solvers::tridiag;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reorthogonalization {
    /// Re-orthogonalize the new Krylov vector against the whole basis each
    /// iteration. The Krylov spaces here are small; robustness wins.
    Full,
    /// Plain three-term recurrence.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosConfig {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub reorthogonalization: Reorthogonalization,
    /// Seed of the random start vector; distinct seeds explore degenerate
    /// (or nearly degenerate) ground spaces differently.
    pub start_seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            max_iterations: 500,
            residual_tolerance: 1e-10,
            reorthogonalization: Reorthogonalization::Full,
            start_seed: 0,
        }
    }
}

impl LanczosConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(crate::error::config("lanczos.max_iterations must be >= 1"));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(crate::error::config(
                "lanczos.residual_tolerance must be > 0",
            ));
        }
        Ok(())
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    math::sum_c64(a.len(), |i| a[i].conj() * b[i])
}

fn norm(a: &[C64]) -> f64 {
    math::sqrt(math::sum_f64(a.len(), |i| a[i].norm_sqr()))
}

/// Lowest Ritz pair of a Hermitian operator by Lanczos iteration with a
/// seeded random start vector.
///
/// `apply_h(input, output)` must implement a Hermitian operator on vectors
/// of length `dim` (a power of two). The returned state is normalized and
/// certified: `‖H v - E v‖ <= residual_tolerance`.
pub fn lanczos_ground_state<F>(
    apply_h: F,
    dim: usize,
    cfg: &LanczosConfig,
) -> Result<(f64, StateVector)>
where
    F: Fn(&[C64], &mut [C64]),
{
    cfg.validate()?;
    if dim < 2 || !dim.is_power_of_two() {
        return Err(usage(alloc::format!(
            "operator dimension must be a power of two >= 2, got {dim}"
        )));
    }
    let sites = dim.trailing_zeros() as usize;

    // Random complex start vector.
    let mut rng = stream_rng(cfg.start_seed, Stream::LanczosStart);
    let mut q = vec![C64::new(0.0, 0.0); dim];
    for a in q.iter_mut() {
        *a = C64::new(
            uniform_symmetric(&mut rng, 0.5),
            uniform_symmetric(&mut rng, 0.5),
        );
    }
    let n0 = norm(&q);
    for a in q.iter_mut() {
        *a /= n0;
    }

    let m = cfg.max_iterations.min(dim);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
    basis.push(q);
    let mut alpha: Vec<f64> = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![C64::new(0.0, 0.0); dim];

    let mut best_residual = f64::INFINITY;
    let mut prev_theta = f64::INFINITY;
    let mut stagnant = 0usize;

    for j in 0..m {
        apply_h(&basis[j], &mut w);
        let a_j = dot(&basis[j], &w).re;
        alpha.push(a_j);
        for (wi, qi) in w.iter_mut().zip(basis[j].iter()) {
            *wi -= qi * a_j;
        }
        if j > 0 {
            let b_prev = beta[j - 1];
            for (wi, qi) in w.iter_mut().zip(basis[j - 1].iter()) {
                *wi -= qi * b_prev;
            }
        }
        if cfg.reorthogonalization == Reorthogonalization::Full {
            for qv in &basis {
                let overlap = dot(qv, &w);
                if overlap.norm_sqr() > 0.0 {
                    for (wi, qi) in w.iter_mut().zip(qv.iter()) {
                        *wi -= qi * overlap;
                    }
                }
            }
        }
        let b_j = norm(&w);

        let theta = tridiag::eigenvalues(&alpha, &beta)[0];
        let scale = math::abs(theta).max(1.0);
        let breakdown = b_j <= 1e-13 * scale;
        if math::abs(theta - prev_theta) <= 1e-3 * cfg.residual_tolerance.max(1e-14) * scale {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        prev_theta = theta;

        // Verify with the true residual once the Ritz value settles (or the
        // Krylov space closes).
        if breakdown || stagnant >= 2 || j + 1 == m || j + 1 == dim {
            let (energy, state, residual) = ritz_vector(&apply_h, &basis, &alpha, &beta, &mut w);
            best_residual = best_residual.min(residual);
            if residual <= cfg.residual_tolerance {
                let sv = StateVector::from_amplitudes(sites, state)?;
                return Ok((energy, sv));
            }
            stagnant = 0;
            if breakdown || j + 1 == dim {
                return Err(Error::Convergence {
                    what: String::from("Lanczos ground state (Krylov space exhausted)"),
                    best_residual,
                    iterations: j + 1,
                });
            }
            // Recompute w: the verification pass clobbered it.
            apply_h(&basis[j], &mut w);
            for (wi, qi) in w.iter_mut().zip(basis[j].iter()) {
                *wi -= qi * alpha[j];
            }
            if j > 0 {
                let b_prev = beta[j - 1];
                for (wi, qi) in w.iter_mut().zip(basis[j - 1].iter()) {
                    *wi -= qi * b_prev;
                }
            }
            if cfg.reorthogonalization == Reorthogonalization::Full {
                for qv in &basis {
                    let overlap = dot(qv, &w);
                    for (wi, qi) in w.iter_mut().zip(qv.iter()) {
                        *wi -= qi * overlap;
                    }
                }
            }
        }

        beta.push(b_j);
        let mut q_next = w.clone();
        let inv = 1.0 / b_j;
        for a in q_next.iter_mut() {
            *a *= inv;
        }
        basis.push(q_next);
    }

    Err(Error::Convergence {
        what: String::from("Lanczos ground state"),
        best_residual,
        iterations: m,
    })
}

/// Build the lowest Ritz vector and certify it with the true residual.
fn ritz_vector<F>(
    apply_h: &F,
    basis: &[Vec<C64>],
    alpha: &[f64],
    beta: &[f64],
    scratch: &mut [C64],
) -> (f64, Vec<C64>, f64)
where
    F: Fn(&[C64], &mut [C64]),
{
    let dim = basis[0].len();
    let (_, s) = tridiag::lowest_eigenpair(alpha, beta);
    let mut v = vec![C64::new(0.0, 0.0); dim];
    for (k, qv) in basis.iter().take(alpha.len()).enumerate() {
        let c = s[k];
        for (vi, qi) in v.iter_mut().zip(qv.iter()) {
            *vi += qi * c;
        }
    }
    let n = norm(&v);
    for vi in v.iter_mut() {
        *vi /= n;
    }
    // Rayleigh quotient and residual.
    apply_h(&v, scratch);
    let energy = dot(&v, scratch).re;
    let mut res_sqr = 0.0;
    for (hv, vi) in scratch.iter().zip(v.iter()) {
        res_sqr += (hv - vi * energy).norm_sqr();
    }
    (energy, v, math::sqrt(res_sqr))
}
