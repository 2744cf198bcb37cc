//! Bitmask computational basis for `L` spin-1/2 sites and matrix-free
//! application of single- and two-site spin operators.
//!
//! Basis encoding: site `b` corresponds to bit `b` of the basis index, and a
//! set bit means "spin up along z". The least significant bit is the system
//! spin, followed by the apparatus sites, then the environment sites.
//!
//! Spin operators are the dimensionless spin-1/2 family `S^α = σ^α / 2` with
//! `S^y = (S^+ - S^-) / 2i` and `S^+|↓⟩ = |↑⟩`, so `S^y|↑⟩ = (i/2)|↓⟩` and
//! `S^y|↓⟩ = -(i/2)|↑⟩`. All operator applications are pure: inputs are
//! never mutated.

use crate::error::{usage, Result};
use crate::math;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub type C64 = num_complex::Complex<f64>;

/// Which part of the universe a site belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// The single measured spin (site 0).
    System,
    /// The ferromagnetic measurement apparatus.
    Apparatus,
    /// The spin-glass environment.
    Environment,
}

/// A site index together with its subsystem label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Site {
    pub index: usize,
    pub subsystem: Subsystem,
}

/// Fixed site layout: site 0 is the system spin, sites `1..=n_apparatus`
/// the apparatus, and the remaining sites the environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n_apparatus: usize,
    pub n_environment: usize,
}

impl Layout {
    pub fn new(n_apparatus: usize, n_environment: usize) -> Self {
        Layout {
            n_apparatus,
            n_environment,
        }
    }

    pub fn num_sites(&self) -> usize {
        1 + self.n_apparatus + self.n_environment
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_sites()
    }

    pub const fn system_site() -> usize {
        0
    }

    pub fn apparatus_sites(&self) -> core::ops::Range<usize> {
        1..1 + self.n_apparatus
    }

    pub fn environment_sites(&self) -> core::ops::Range<usize> {
        1 + self.n_apparatus..self.num_sites()
    }

    /// Bitmask selecting the apparatus sites.
    pub fn apparatus_mask(&self) -> usize {
        ((1usize << self.n_apparatus) - 1) << 1
    }

    pub fn site(&self, index: usize) -> Result<Site> {
        if index >= self.num_sites() {
            return Err(usage(alloc::format!(
                "site index {index} out of range for {} sites",
                self.num_sites()
            )));
        }
        let subsystem = if index == 0 {
            Subsystem::System
        } else if index <= self.n_apparatus {
            Subsystem::Apparatus
        } else {
            Subsystem::Environment
        };
        Ok(Site { index, subsystem })
    }
}

/// Operator axis selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Dense complex amplitude vector over the `2^L` computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    sites: usize,
    amp: Vec<C64>,
}

impl StateVector {
    /// The zero vector on `sites` spins.
    pub fn zero(sites: usize) -> Self {
        StateVector {
            sites,
            amp: vec![C64::new(0.0, 0.0); 1usize << sites],
        }
    }

    /// The computational basis state `|bits⟩`.
    pub fn basis(sites: usize, bits: usize) -> Result<Self> {
        let mut v = StateVector::zero(sites);
        if bits >= v.dim() {
            return Err(usage(alloc::format!(
                "basis state {bits:#x} out of range for dimension {}",
                v.dim()
            )));
        }
        v.amp[bits] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_amplitudes(sites: usize, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != 1usize << sites {
            return Err(usage(alloc::format!(
                "amplitude count {} does not match dimension {}",
                amp.len(),
                1usize << sites
            )));
        }
        Ok(StateVector { sites, amp })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amp
    }

    /// Sesquilinear inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_dim(other)?;
        Ok(math::sum_c64(self.dim(), |i| self.amp[i].conj() * other.amp[i]))
    }

    pub fn norm_sqr(&self) -> f64 {
        math::sum_f64(self.dim(), |i| self.amp[i].norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sqr())
    }

    /// Rescale to unit norm (no-op on the zero vector).
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amp {
                *a *= inv;
            }
        }
    }

    fn check_dim(&self, other: &StateVector) -> Result<()> {
        if self.sites != other.sites {
            return Err(usage(alloc::format!(
                "dimension mismatch: {} vs {} sites",
                self.sites,
                other.sites
            )));
        }
        Ok(())
    }
}

/// `a * x + y`, leaving both inputs untouched.
pub fn axpy(a: C64, x: &StateVector, y: &StateVector) -> Result<StateVector> {
    x.check_dim(y)?;
    let mut out = y.clone();
    for (o, xi) in out.amp.iter_mut().zip(x.amp.iter()) {
        *o += a * xi;
    }
    Ok(out)
}

/// `a * x`.
pub fn scale(a: C64, x: &StateVector) -> StateVector {
    let mut out = x.clone();
    for o in &mut out.amp {
        *o *= a;
    }
    out
}

fn check_site(site: usize, psi: &StateVector) -> Result<usize> {
    if site >= psi.sites() {
        return Err(usage(alloc::format!(
            "site index {site} out of range for {} sites",
            psi.sites()
        )));
    }
    Ok(1usize << site)
}

/// `S^z` on one site: diagonal, `+1/2` on up bits, `-1/2` on down bits.
pub fn apply_sz(site: usize, psi: &StateVector) -> Result<StateVector> {
    let mask = check_site(site, psi)?;
    let mut out = StateVector::zero(psi.sites());
    for (b, (o, a)) in out.amp.iter_mut().zip(psi.amp.iter()).enumerate() {
        let s = if b & mask != 0 { 0.5 } else { -0.5 };
        *o = a * s;
    }
    Ok(out)
}

/// `S^x` on one site: flips the bit with coefficient `1/2`.
pub fn apply_sx(site: usize, psi: &StateVector) -> Result<StateVector> {
    let mask = check_site(site, psi)?;
    let mut out = StateVector::zero(psi.sites());
    for b in 0..psi.dim() {
        out.amp[b] = psi.amp[b ^ mask] * 0.5;
    }
    Ok(out)
}

/// `S^y` on one site: flips the bit with coefficient `±i/2`.
pub fn apply_sy(site: usize, psi: &StateVector) -> Result<StateVector> {
    let mask = check_site(site, psi)?;
    let mut out = StateVector::zero(psi.sites());
    let up = C64::new(0.0, -0.5); // source spin was down
    let down = C64::new(0.0, 0.5); // source spin was up
    for b in 0..psi.dim() {
        let c = if b & mask != 0 { up } else { down };
        out.amp[b] = psi.amp[b ^ mask] * c;
    }
    Ok(out)
}

/// Accumulate `coupling * S_i^α S_j^α * psi` onto `acc`.
///
/// z-z terms are diagonal; x-x and y-y terms flip both bits.
pub fn apply_two_site(
    axis: Axis,
    i: usize,
    j: usize,
    coupling: f64,
    psi: &StateVector,
    acc: &mut StateVector,
) -> Result<()> {
    if i == j {
        return Err(usage(String::from("two-site operator requires i != j")));
    }
    let mi = check_site(i, psi)?;
    let mj = check_site(j, psi)?;
    psi.check_dim(acc)?;
    match axis {
        Axis::Z => {
            for (b, (o, a)) in acc.amp.iter_mut().zip(psi.amp.iter()).enumerate() {
                let eq = (b & mi != 0) == (b & mj != 0);
                let w = if eq { 0.25 } else { -0.25 };
                *o += a * (coupling * w);
            }
        }
        Axis::X => {
            let m = mi | mj;
            for b in 0..psi.dim() {
                acc.amp[b] += psi.amp[b ^ m] * (coupling * 0.25);
            }
        }
        Axis::Y => {
            let m = mi | mj;
            for b in 0..psi.dim() {
                let eq = (b & mi != 0) == (b & mj != 0);
                let w = if eq { -0.25 } else { 0.25 };
                acc.amp[b] += psi.amp[b ^ m] * (coupling * w);
            }
        }
    }
    Ok(())
}

/// Product state `|sys⟩ ⊗ |app⟩ ⊗ |env⟩` in the fixed site layout.
///
/// The system factor must live on 1 site; the full index is
/// `b = sys_bit | app_bits << 1 | env_bits << (1 + n_app)`.
pub fn tensor_product(
    sys: &StateVector,
    app: &StateVector,
    env: &StateVector,
) -> Result<StateVector> {
    if sys.sites() != 1 {
        return Err(usage(String::from("system factor must be a single spin")));
    }
    let sites = 1 + app.sites() + env.sites();
    let mut out = StateVector::zero(sites);
    for (e, ae) in env.amp.iter().enumerate() {
        if *ae == C64::new(0.0, 0.0) {
            continue;
        }
        for (a, aa) in app.amp.iter().enumerate() {
            let partial = ae * aa;
            let base = (e << (1 + app.sites())) | (a << 1);
            out.amp[base] = partial * sys.amp[0];
            out.amp[base | 1] = partial * sys.amp[1];
        }
    }
    Ok(out)
}
