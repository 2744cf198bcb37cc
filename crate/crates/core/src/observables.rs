//! Scalar diagnostics of a state: magnetization, apparatus exchange energy,
//! system-spin expectation, norm, and the conserved universe energy.

use crate::error::{usage, Result};
use crate::hilbert::{StateVector, C64};
use crate::math;
use crate::model::{magnetization_field, CouplingSet, HamiltonianKernel};
use alloc::vec;

/// One recorded sample of all trajectory observables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    /// Dimensionless apparatus magnetization `M = Σ_{i∈A} ⟨S_i^z⟩`.
    pub m: f64,
    /// Apparatus exchange energy `-Σ_{i<j∈A} Σ_α J_ij^α ⟨S_i^α S_j^α⟩`.
    pub e_exch: f64,
    /// `⟨S_sys^z⟩ ∈ [-1/2, 1/2]`.
    pub s_sys_z: f64,
    /// The self-field value; identical functional to `m`, stored redundantly
    /// as a cross-check.
    pub b_tilde: f64,
    pub norm: f64,
    /// Conserved universe energy `⟨H_linear⟩ - μ b̃² / 2`.
    pub e_u: f64,
}

/// Expectation `⟨psi| Σ_α w_α S_i^α S_j^α |psi⟩` for one pair (real by
/// hermiticity; computed in a single fused pass).
pub fn pair_expectation(
    psi: &StateVector,
    i: usize,
    j: usize,
    wx: f64,
    wy: f64,
    wz: f64,
) -> Result<f64> {
    if i == j || i >= psi.sites() || j >= psi.sites() {
        return Err(usage("pair expectation requires distinct in-range sites"));
    }
    let mi = 1usize << i;
    let mj = 1usize << j;
    let m = mi | mj;
    let amp = psi.amplitudes();
    let c_eq = 0.25 * (wx - wy);
    let c_neq = 0.25 * (wx + wy);
    let total = math::sum_c64(psi.dim(), |b| {
        let eq = (b & mi != 0) == (b & mj != 0);
        let zpart = if eq { 0.25 * wz } else { -0.25 * wz };
        let flip = if eq { c_eq } else { c_neq };
        amp[b].conj() * (amp[b] * zpart + amp[b ^ m] * flip)
    });
    Ok(total.re)
}

/// `M(t) = Σ_{i∈A} ⟨S_i^z⟩`; the same functional as the self-field.
pub fn magnetization(psi: &StateVector, c: &CouplingSet) -> Result<f64> {
    Ok(magnetization_field(psi, c)?.b_tilde)
}

/// Apparatus exchange energy with the model's own anisotropic weights:
/// `E = -Σ_{i<j∈A} Σ_α J_ij^α ⟨S_i^α S_j^α⟩` (equals `⟨H_A⟩`).
pub fn exchange_energy(c: &CouplingSet, psi: &StateVector) -> Result<f64> {
    let mut e = 0.0;
    for p in &c.apparatus {
        e += pair_expectation(psi, p.i, p.j, -p.x, -p.y, -p.z)?;
    }
    Ok(e)
}

/// `⟨S_sys^z⟩` of the measured spin (site 0).
pub fn system_spin_z(psi: &StateVector) -> f64 {
    let amp = psi.amplitudes();
    math::sum_f64(psi.dim(), |b| {
        amp[b].norm_sqr() * if b & 1 != 0 { 0.5 } else { -0.5 }
    })
}

/// Conserved universe energy `E_U = ⟨H_linear⟩ - μ b̃² / 2`, the
/// half-weighted self-field correction evaluated at the state's own field.
pub fn universe_energy(c: &CouplingSet, psi: &StateVector) -> Result<f64> {
    let kernel = HamiltonianKernel::new(c);
    let mut scratch = vec![C64::new(0.0, 0.0); psi.dim()];
    Ok(universe_energy_with(c, &kernel, psi.amplitudes(), &mut scratch))
}

/// Workspace variant used by the evolution loop (no allocation, shared
/// kernel). `scratch` receives `H_linear psi`.
pub fn universe_energy_with(
    c: &CouplingSet,
    kernel: &HamiltonianKernel,
    psi: &[C64],
    scratch: &mut [C64],
) -> f64 {
    kernel.apply(0.0, psi, scratch);
    let h_lin = math::sum_c64(psi.len(), |b| psi[b].conj() * scratch[b]).re;
    let app_mask = c.layout().apparatus_mask();
    let half = c.config.n_a as f64 * 0.5;
    let b_tilde = math::sum_f64(psi.len(), |b| {
        psi[b].norm_sqr() * ((b & app_mask).count_ones() as f64 - half)
    });
    h_lin - 0.5 * c.config.mu * b_tilde * b_tilde
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::tensor_product;
    use crate::model::{build_couplings, ModelConfig};
    use crate::rng::{stream_rng, uniform_symmetric, Stream};

    fn isolated(gamma: f64, mu: f64) -> CouplingSet {
        build_couplings(
            &ModelConfig {
                n_a: 4,
                n_e: 1,
                gamma,
                delta: 0.0,
                omega: 0.0,
                theta: 0.0,
                mu,
            },
            0,
        )
        .unwrap()
    }

    fn product_state(sys_bits: usize, app_bits: usize, c: &CouplingSet) -> StateVector {
        let sys = StateVector::basis(1, sys_bits).unwrap();
        let app = StateVector::basis(c.config.n_a, app_bits).unwrap();
        let env = StateVector::basis(c.config.n_e, 0).unwrap();
        tensor_product(&sys, &app, &env).unwrap()
    }

    #[test]
    fn exchange_energy_anchors() {
        let c = isolated(0.1, 0.0);
        // Fully polarized rectangle: -(4 + √2)/4, transverse parts vanish on
        // the product state even at gamma > 0.
        let psi = product_state(1, 0b1111, &c);
        let e = exchange_energy(&c, &psi).unwrap();
        assert!((e - -(4.0 + 2f64.sqrt()) / 4.0).abs() < 1e-10);

        // Antiferromagnetic rectangle at gamma = 0: +1 - 1/(2√2).
        let c0 = isolated(0.0, 0.0);
        let psi = product_state(1, 0b0101, &c0);
        let e = exchange_energy(&c0, &psi).unwrap();
        assert!((e - (1.0 - 2f64.sqrt() / 4.0)).abs() < 1e-10);

        // All couplings zero.
        let mut cz = isolated(0.0, 0.0);
        for p in cz.apparatus.iter_mut() {
            p.x = 0.0;
            p.y = 0.0;
            p.z = 0.0;
        }
        assert_eq!(exchange_energy(&cz, &psi).unwrap(), 0.0);
    }

    #[test]
    fn magnetization_matches_field_functional() {
        let c = isolated(0.1, 12.0);
        let psi = product_state(1, 0b1111, &c);
        assert_eq!(
            magnetization(&psi, &c).unwrap(),
            crate::model::magnetization_field(&psi, &c).unwrap().b_tilde
        );
        assert!((magnetization(&psi, &c).unwrap() - 2.0).abs() < 1e-14);
        let afm = product_state(1, 0b0101, &c);
        assert_eq!(magnetization(&afm, &c).unwrap(), 0.0);
    }

    #[test]
    fn system_spin_z_analytic_values() {
        // theta = 0 -> +1/2; theta = pi/4 -> 0; theta = pi/6 -> 1/4.
        for (theta, expect) in [
            (0.0, 0.5),
            (core::f64::consts::FRAC_PI_4, 0.0),
            (core::f64::consts::FRAC_PI_6, 0.25),
        ] {
            let mut sys = StateVector::zero(1);
            sys.amplitudes_mut()[1] = C64::new(theta.cos(), 0.0);
            sys.amplitudes_mut()[0] = C64::new(theta.sin(), 0.0);
            let app = StateVector::basis(2, 0b01).unwrap();
            let env = StateVector::basis(0, 0).unwrap();
            let psi = tensor_product(&sys, &app, &env).unwrap();
            assert!((system_spin_z(&psi) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn universe_energy_anchor() {
        // System along +x, apparatus fully up, gamma = 0, mu = 12:
        // E_U = -(4+√2)/4 + 0 - 24 = -25.3535533905932731...
        let c = isolated(0.0, 12.0);
        let inv = 0.5f64.sqrt();
        let mut sys = StateVector::zero(1);
        sys.amplitudes_mut()[0] = C64::new(inv, 0.0);
        sys.amplitudes_mut()[1] = C64::new(inv, 0.0);
        let app = StateVector::basis(4, 0b1111).unwrap();
        let env = StateVector::basis(1, 0).unwrap();
        let psi = tensor_product(&sys, &app, &env).unwrap();
        let e_u = universe_energy(&c, &psi).unwrap();
        assert!(
            (e_u - -25.353553390593273).abs() < 1e-10,
            "E_U = {e_u}"
        );

        // mu = 0 reduces to <H_linear>.
        let c0 = isolated(0.0, 0.0);
        let e_u0 = universe_energy(&c0, &psi).unwrap();
        assert!((e_u0 - -(4.0 + 2f64.sqrt()) / 4.0).abs() < 1e-10);
    }

    #[test]
    fn observables_are_phase_invariant() {
        let c = build_couplings(
            &ModelConfig {
                n_a: 4,
                n_e: 2,
                gamma: 0.4,
                delta: 0.3,
                omega: 0.8,
                theta: 0.5,
                mu: 3.0,
            },
            8,
        )
        .unwrap();
        let mut rng = stream_rng(2, Stream::LanczosStart);
        let mut psi = StateVector::zero(c.num_sites());
        for a in psi.amplitudes_mut() {
            *a = C64::new(
                uniform_symmetric(&mut rng, 1.0),
                uniform_symmetric(&mut rng, 1.0),
            );
        }
        psi.normalize();
        let phase = C64::new((0.77f64).cos(), (0.77f64).sin());
        let rotated = crate::hilbert::scale(phase, &psi);
        assert!((magnetization(&psi, &c).unwrap() - magnetization(&rotated, &c).unwrap()).abs() < 1e-13);
        assert!((exchange_energy(&c, &psi).unwrap() - exchange_energy(&c, &rotated).unwrap()).abs() < 1e-13);
        assert!((system_spin_z(&psi) - system_spin_z(&rotated)).abs() < 1e-13);
        assert!((universe_energy(&c, &psi).unwrap() - universe_energy(&c, &rotated).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn polarized_state_minimizes_exchange_energy_over_product_states() {
        // 1000 random product states; none beats the fully polarized state
        // at small transverse anisotropy.
        let c = isolated(0.1, 0.0);
        let polarized = product_state(1, 0b1111, &c);
        let e_min = exchange_energy(&c, &polarized).unwrap();
        let mut rng = stream_rng(99, Stream::LanczosStart);
        for _ in 0..1000 {
            // Product of single-site Bloch states, expanded site by site.
            let mut amp = alloc::vec![C64::new(1.0, 0.0)];
            for _ in 0..4 {
                let th = (uniform_symmetric(&mut rng, 0.5) + 0.5) * core::f64::consts::PI;
                let ph = (uniform_symmetric(&mut rng, 0.5) + 0.5) * core::f64::consts::TAU;
                let up = C64::new((th * 0.5).cos(), 0.0);
                let down = C64::new(ph.cos(), ph.sin()) * (th * 0.5).sin();
                let mut next = alloc::vec![C64::new(0.0, 0.0); amp.len() * 2];
                for (b, a) in amp.iter().enumerate() {
                    next[b] = a * down;
                    next[b | amp.len()] = a * up;
                }
                amp = next;
            }
            let app = StateVector::from_amplitudes(4, amp).unwrap();
            let sys = StateVector::basis(1, 1).unwrap();
            let env = StateVector::basis(1, 0).unwrap();
            let psi = tensor_product(&sys, &app, &env).unwrap();
            let e = exchange_energy(&c, &psi).unwrap();
            assert!(e >= e_min - 1e-12, "product state beat the polarized state: {e} < {e_min}");
        }
    }
}
