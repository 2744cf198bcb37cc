//! The full model Hamiltonian: coupling construction from a seed, and
//! matrix-free application of the linear terms plus the nonlinear
//! self-field term of the apparatus.
//!
//! Terms, with `S` apparatus spins, `I` environment spins and `S_sys` the
//! measured spin (all spin-1/2, unordered pairs counted once):
//!
//! * apparatus exchange: `-Σ_{i<j∈A} Σ_α J_ij^α S_i^α S_j^α`, ferromagnetic
//!   with an easy z-axis (`J^x = J^y = γ J^z`, `γ ≤ 1`),
//! * spin-glass environment: `+Σ_{i<j∈E} Σ_α Ω_ij^α I_i^α I_j^α`, fully
//!   connected random couplings,
//! * apparatus-environment: `+Σ_{i∈A,j∈E} Σ_α Δ_ij^α S_i^α I_j^α`,
//! * system-environment: `+Σ_{j∈E} Σ_α Θ_j^α S_sys^α I_j^α`,
//! * system-apparatus: `-Σ_{i∈A} Γ_i S_sys^z S_i^z` with `Γ_i = 1`. The
//!   orientation is chosen so that the measured spin biases the apparatus
//!   magnetization toward its own direction, which is what makes the
//!   up-pointer probability track the squared up-amplitude of the prepared
//!   spin; the opposite orientation produces the mirrored statistics.
//! * nonlinear self-field: `H_B = -μ b̃ Σ_{j∈A} S_j^z` where
//!   `b̃ = ⟨Ψ|Σ_{i∈A} S_i^z|Ψ⟩` is the instantaneous dimensionless
//!   magnetization of the apparatus (an inner product, not an ensemble
//!   average). `H_B` is diagonal in the computational basis.
//!
//! Random couplings are uniform in `[-Δ,Δ]`, `[-Ω,Ω]`, `[-Θ,Θ]`, drawn
//! independently per axis from per-family ChaCha streams (see [`crate::rng`]),
//! so a `(config, seed)` pair reproduces the coupling set bit-exactly.

use crate::error::{config as config_err, usage, Result};
use crate::hilbert::{Layout, StateVector, C64};
use crate::math;
use crate::rng::{stream_rng, uniform_symmetric, Stream};
use alloc::vec;
use alloc::vec::Vec;

/// Apparatus geometry selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    /// 4 spins on a 2x2 rectangle: 4 nearest-neighbor edges, 2 diagonals.
    Rectangle4,
    /// 8 spins on a cube: 12 edges, 12 face diagonals.
    Cube8,
}

/// Apparatus bond tables in apparatus-local indices (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub n_a: usize,
    pub nn_pairs: Vec<(usize, usize)>,
    pub nnn_pairs: Vec<(usize, usize)>,
}

impl Geometry {
    /// Bond tables for the supported apparatus sizes.
    ///
    /// Sites are laid out along a Gray-code walk of the unit square / cube,
    /// so consecutive site indices are always nearest neighbors and the
    /// alternating state `|↑↓…↑↓⟩` is the geometric checkerboard. Nearest
    /// neighbors differ in one coordinate, next-nearest (diagonal) pairs in
    /// two.
    pub fn for_apparatus(n_a: usize) -> Result<Geometry> {
        let (kind, coord_bits) = match n_a {
            4 => (GeometryKind::Rectangle4, 2),
            8 => (GeometryKind::Cube8, 3),
            _ => {
                return Err(config_err(alloc::format!(
                    "unsupported apparatus size {n_a}; expected 4 or 8"
                )))
            }
        };
        let n = 1usize << coord_bits;
        let coords: Vec<usize> = (0..n).map(|k| k ^ (k >> 1)).collect();
        let mut nn = Vec::new();
        let mut nnn = Vec::new();
        for v in 0..n {
            for w in v + 1..n {
                match (coords[v] ^ coords[w]).count_ones() {
                    1 => nn.push((v, w)),
                    2 => nnn.push((v, w)),
                    _ => {}
                }
            }
        }
        Ok(Geometry {
            kind,
            n_a,
            nn_pairs: nn,
            nnn_pairs: nnn,
        })
    }
}

/// Model parameters; `J = 1` is the unit of energy throughout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub n_a: usize,
    pub n_e: usize,
    /// Transverse apparatus anisotropy `J^x = J^y = γ J^z`.
    pub gamma: f64,
    /// Apparatus-environment coupling range.
    pub delta: f64,
    /// Environment-environment coupling range.
    pub omega: f64,
    /// System-environment coupling range.
    pub theta: f64,
    /// Nonlinearity strength.
    pub mu: f64,
}

impl ModelConfig {
    pub fn layout(&self) -> Layout {
        Layout::new(self.n_a, self.n_e)
    }
}

/// One pair bond with per-axis couplings (global site indices, `i < j`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCoupling {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// All Hamiltonian parameters for one realization, plus the seed that
/// generated the random ones.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    pub config: ModelConfig,
    pub geometry: Geometry,
    pub seed: u64,
    /// Apparatus exchange bonds (`J` values; the leading minus of the
    /// ferromagnet lives in the Hamiltonian, not here).
    pub apparatus: Vec<PairCoupling>,
    /// Apparatus-environment bonds (`Δ` values).
    pub app_env: Vec<PairCoupling>,
    /// Environment-environment bonds (`Ω` values).
    pub env: Vec<PairCoupling>,
    /// System-environment bonds (`Θ` values; `i` is the system site).
    pub sys_env: Vec<PairCoupling>,
    /// System-apparatus `Γ_i`, one per apparatus site.
    pub sys_app: Vec<f64>,
}

impl CouplingSet {
    pub fn layout(&self) -> Layout {
        self.config.layout()
    }

    pub fn num_sites(&self) -> usize {
        self.layout().num_sites()
    }

    pub fn dim(&self) -> usize {
        self.layout().dim()
    }
}

/// The instantaneous dimensionless magnetic field of the apparatus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldValue {
    pub b_tilde: f64,
}

/// Deterministically construct all couplings from `(config, seed)`.
pub fn build_couplings(config: &ModelConfig, seed: u64) -> Result<CouplingSet> {
    if config.n_e < 1 {
        return Err(config_err("n_e must be at least 1"));
    }
    if !(0.0..=1.0).contains(&config.gamma) {
        return Err(config_err("gamma must lie in [0, 1]"));
    }
    for (name, v) in [
        ("delta", config.delta),
        ("omega", config.omega),
        ("theta", config.theta),
        ("mu", config.mu),
    ] {
        if !(v >= 0.0) {
            return Err(config_err(alloc::format!("{name} must be >= 0, got {v}")));
        }
    }
    let geometry = Geometry::for_apparatus(config.n_a)?;
    let layout = config.layout();

    let mut apparatus = Vec::new();
    for (&(a, b), jz) in geometry
        .nn_pairs
        .iter()
        .map(|p| (p, 1.0))
        .chain(geometry.nnn_pairs.iter().map(|p| (p, 1.0 / math::sqrt(2.0))))
    {
        apparatus.push(PairCoupling {
            i: a + 1,
            j: b + 1,
            x: config.gamma * jz,
            y: config.gamma * jz,
            z: jz,
        });
    }

    let env_sites: Vec<usize> = layout.environment_sites().collect();

    let mut delta_rng = stream_rng(seed, Stream::Delta);
    let mut app_env = Vec::new();
    for i in layout.apparatus_sites() {
        for &j in &env_sites {
            app_env.push(PairCoupling {
                i,
                j,
                x: uniform_symmetric(&mut delta_rng, config.delta),
                y: uniform_symmetric(&mut delta_rng, config.delta),
                z: uniform_symmetric(&mut delta_rng, config.delta),
            });
        }
    }

    let mut omega_rng = stream_rng(seed, Stream::Omega);
    let mut env = Vec::new();
    for (a, &i) in env_sites.iter().enumerate() {
        for &j in &env_sites[a + 1..] {
            env.push(PairCoupling {
                i,
                j,
                x: uniform_symmetric(&mut omega_rng, config.omega),
                y: uniform_symmetric(&mut omega_rng, config.omega),
                z: uniform_symmetric(&mut omega_rng, config.omega),
            });
        }
    }

    let mut theta_rng = stream_rng(seed, Stream::Theta);
    let mut sys_env = Vec::new();
    for &j in &env_sites {
        sys_env.push(PairCoupling {
            i: Layout::system_site(),
            j,
            x: uniform_symmetric(&mut theta_rng, config.theta),
            y: uniform_symmetric(&mut theta_rng, config.theta),
            z: uniform_symmetric(&mut theta_rng, config.theta),
        });
    }

    Ok(CouplingSet {
        config: *config,
        geometry,
        seed,
        apparatus,
        app_env,
        env,
        sys_env,
        sys_app: vec![1.0; config.n_a],
    })
}

/// A signed bilinear term `t^α S_i^α S_j^α` fed to the kernel builder
/// (Hamiltonian-level sign already applied).
#[derive(Clone, Copy, Debug)]
pub struct SignedPair {
    pub i: usize,
    pub j: usize,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

#[derive(Clone, Copy, Debug)]
struct FlipTerm {
    mask: usize,
    lo_bit: u32,
    bit_i: u32,
    bit_j: u32,
    /// Coefficient by bit parity of the output index: `[equal, different]`.
    c: [f64; 2],
}

/// Output-block size for the cache-blocked matvec (complex elements).
const BLOCK_BITS: usize = 13;

/// Matrix-free application of `H_linear + f · M_z` where
/// `M_z = Σ_{i∈A} S_i^z` and `f` is a caller-supplied diagonal field
/// coefficient (`f = -μ b̃` reproduces the nonlinear term).
///
/// All z-z terms are folded into one precomputed diagonal; each pair's
/// transverse part becomes a single double-flip term with parity-selected
/// coefficients `(t^x ∓ t^y)/4`. Application walks the output in blocks so
/// the scattered reads stay cache-resident.
pub struct HamiltonianKernel {
    n_sites: usize,
    diag: Vec<f64>,
    flips: Vec<FlipTerm>,
    app_mask: usize,
    half_n_app: f64,
    flip_bound: f64,
}

impl HamiltonianKernel {
    /// Kernel for the full linear Hamiltonian of a coupling set.
    pub fn new(c: &CouplingSet) -> Self {
        let layout = c.layout();
        let mut terms = Vec::new();
        for p in &c.apparatus {
            terms.push(SignedPair {
                i: p.i,
                j: p.j,
                tx: -p.x,
                ty: -p.y,
                tz: -p.z,
            });
        }
        for p in c.app_env.iter().chain(c.env.iter()).chain(c.sys_env.iter()) {
            terms.push(SignedPair {
                i: p.i,
                j: p.j,
                tx: p.x,
                ty: p.y,
                tz: p.z,
            });
        }
        for (k, gamma_i) in c.sys_app.iter().enumerate() {
            terms.push(SignedPair {
                i: Layout::system_site(),
                j: 1 + k,
                tx: 0.0,
                ty: 0.0,
                tz: -gamma_i,
            });
        }
        Self::from_terms(layout.num_sites(), layout.apparatus_mask(), &terms)
    }

    /// Kernel for the environment Hamiltonian alone, with environment sites
    /// remapped onto bits `0..n_e`. Used for ground-state preparation.
    pub fn environment_only(c: &CouplingSet) -> Self {
        let offset = 1 + c.config.n_a;
        let terms: Vec<SignedPair> = c
            .env
            .iter()
            .map(|p| SignedPair {
                i: p.i - offset,
                j: p.j - offset,
                tx: p.x,
                ty: p.y,
                tz: p.z,
            })
            .collect();
        Self::from_terms(c.config.n_e, 0, &terms)
    }

    /// Kernel from raw signed terms; `app_mask` selects the sites whose
    /// `S^z` sum couples to the diagonal field coefficient.
    pub fn from_terms(n_sites: usize, app_mask: usize, terms: &[SignedPair]) -> Self {
        let dim = 1usize << n_sites;
        let half_n_app = app_mask.count_ones() as f64 * 0.5;

        let zterms: Vec<(u32, u32, f64)> = terms
            .iter()
            .filter(|t| t.tz != 0.0)
            .map(|t| (t.i as u32, t.j as u32, 0.25 * t.tz))
            .collect();
        let mut diag = vec![0.0f64; dim];
        fill_diag(&mut diag, &zterms);

        let mut flips: Vec<FlipTerm> = terms
            .iter()
            .filter(|t| t.tx != 0.0 || t.ty != 0.0)
            .map(|t| {
                let mask = (1usize << t.i) | (1usize << t.j);
                FlipTerm {
                    mask,
                    lo_bit: mask.trailing_zeros(),
                    bit_i: t.i as u32,
                    bit_j: t.j as u32,
                    c: [0.25 * (t.tx - t.ty), 0.25 * (t.tx + t.ty)],
                }
            })
            .collect();
        // Terms sharing the same remote source block run back to back.
        let hi = !(block_len(dim) - 1);
        flips.sort_by_key(|t| (t.mask & hi, t.mask));

        let flip_bound = flips
            .iter()
            .map(|t| math::abs(t.c[0]).max(math::abs(t.c[1])))
            .sum();

        HamiltonianKernel {
            n_sites,
            diag,
            flips,
            app_mask,
            half_n_app,
            flip_bound,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `out = (H_linear + field_coeff · M_z) psi`.
    pub fn apply(&self, field_coeff: f64, psi: &[C64], out: &mut [C64]) {
        debug_assert_eq!(psi.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let block = block_len(self.dim());

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            out.par_chunks_mut(block).enumerate().for_each(|(bi, ob)| {
                self.apply_block(field_coeff, psi, ob, bi * block);
            });
        }
        #[cfg(not(feature = "parallel"))]
        {
            for (bi, ob) in out.chunks_mut(block).enumerate() {
                self.apply_block(field_coeff, psi, ob, bi * block);
            }
        }
    }

    fn apply_block(&self, field: f64, psi: &[C64], out_block: &mut [C64], base: usize) {
        let len = out_block.len();
        if field == 0.0 {
            let d = &self.diag[base..base + len];
            let p = &psi[base..base + len];
            for k in 0..len {
                out_block[k] = p[k] * d[k];
            }
        } else {
            let d = &self.diag[base..base + len];
            let p = &psi[base..base + len];
            for k in 0..len {
                let mz = ((base + k) & self.app_mask).count_ones() as f64 - self.half_n_app;
                out_block[k] = p[k] * (d[k] + field * mz);
            }
        }
        self.flip_pass(psi, out_block, base);
    }

    /// Accumulate all double-flip terms onto `out_block`. Coefficients are
    /// constant along runs of `2^lo_bit`, so the work decomposes into
    /// contiguous real axpys over the interleaved re/im doubles.
    fn flip_pass(&self, psi: &[C64], out_block: &mut [C64], base: usize) {
        let len = out_block.len();
        let lo_mask = len - 1;
        for t in &self.flips {
            let m_lo = t.mask & lo_mask;
            let src_block = base ^ (t.mask & !lo_mask);
            if m_lo == 0 {
                // Both sites above the block: one full-block axpy.
                let parity = (((base >> t.bit_i) ^ (base >> t.bit_j)) & 1) as usize;
                let c = t.c[parity];
                if c != 0.0 {
                    axpy_f64(
                        as_f64s_mut(out_block),
                        &as_f64s(psi)[2 * src_block..2 * (src_block + len)],
                        c,
                    );
                }
            } else if t.lo_bit == 0 {
                // System-site pairs: element-wise with alternating parity.
                let mut o = 0;
                while o < len {
                    let pj = ((base + o) >> t.bit_j) & 1;
                    let c0 = t.c[pj as usize];
                    let c1 = t.c[(1 ^ pj) as usize];
                    // Source of the even element is odd and vice versa.
                    let s = src_block + (o ^ m_lo);
                    out_block[o] += psi[s] * c0;
                    out_block[o + 1] += psi[s - 1] * c1;
                    o += 2;
                }
            } else {
                // Two runs of 2^lo_bit per super-run; bit_i alternates
                // between the halves, bit_j is constant across both.
                let run = 1usize << t.lo_bit;
                let src_all = as_f64s(psi);
                let dst_all = as_f64s_mut(out_block);
                let mut o = 0;
                while o < len {
                    let b = base + o;
                    let parity = (((b >> t.bit_i) ^ (b >> t.bit_j)) & 1) as usize;
                    let c0 = t.c[parity];
                    let c1 = t.c[1 - parity];
                    let s0 = src_block + (o ^ m_lo);
                    let s1 = src_block + ((o + run) ^ m_lo);
                    if c0 != 0.0 {
                        axpy_f64(
                            &mut dst_all[2 * o..2 * (o + run)],
                            &src_all[2 * s0..2 * (s0 + run)],
                            c0,
                        );
                    }
                    if c1 != 0.0 {
                        axpy_f64(
                            &mut dst_all[2 * (o + run)..2 * (o + 2 * run)],
                            &src_all[2 * s1..2 * (s1 + run)],
                            c1,
                        );
                    }
                    o += 2 * run;
                }
            }
        }
    }

    /// `out = H_flip psi` (transverse terms only); used to estimate the
    /// off-diagonal operator norm.
    pub fn apply_flips_only(&self, psi: &[C64], out: &mut [C64]) {
        debug_assert_eq!(psi.len(), self.dim());
        let block = block_len(self.dim());
        let zero = C64::new(0.0, 0.0);

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            out.par_chunks_mut(block).enumerate().for_each(|(bi, ob)| {
                ob.fill(zero);
                self.flip_pass(psi, ob, bi * block);
            });
        }
        #[cfg(not(feature = "parallel"))]
        {
            for (bi, ob) in out.chunks_mut(block).enumerate() {
                ob.fill(zero);
                self.flip_pass(psi, ob, bi * block);
            }
        }
    }

    /// Triangle-inequality norm of the flip part alone.
    pub fn flip_bound(&self) -> f64 {
        self.flip_bound
    }

    /// Lanczos estimate of `‖H_flip‖` (largest Ritz magnitude after a fixed
    /// number of iterations). Converges to the true norm from below, so
    /// callers must add a safety margin and keep [`Self::flip_bound`] as the
    /// certified fallback.
    pub fn flip_norm_estimate(&self, iterations: usize) -> f64 {
        if self.flips.is_empty() {
            return 0.0;
        }
        let dim = self.dim();
        let mut rng = crate::rng::stream_rng(0x5EED_B0B5, crate::rng::Stream::LanczosStart);
        let mut q = alloc::vec![C64::new(0.0, 0.0); dim];
        for a in q.iter_mut() {
            *a = C64::new(
                crate::rng::uniform_symmetric(&mut rng, 0.5),
                crate::rng::uniform_symmetric(&mut rng, 0.5),
            );
        }
        let n0 = math::sqrt(math::sum_f64(dim, |i| q[i].norm_sqr()));
        for a in q.iter_mut() {
            *a /= n0;
        }
        let mut q_prev = alloc::vec![C64::new(0.0, 0.0); dim];
        let mut w = alloc::vec![C64::new(0.0, 0.0); dim];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let m = iterations.min(dim).max(2);
        for j in 0..m {
            self.apply_flips_only(&q, &mut w);
            let a_j = math::sum_c64(dim, |i| q[i].conj() * w[i]).re;
            alpha.push(a_j);
            for i in 0..dim {
                w[i] -= q[i] * a_j;
                if j > 0 {
                    w[i] -= q_prev[i] * beta[j - 1];
                }
            }
            let b_j = math::sqrt(math::sum_f64(dim, |i| w[i].norm_sqr()));
            if b_j < 1e-14 {
                break;
            }
            beta.push(b_j);
            core::mem::swap(&mut q_prev, &mut q);
            let inv = 1.0 / b_j;
            for i in 0..dim {
                q[i] = w[i] * inv;
            }
        }
        let evs = crate::solvers::tridiag::eigenvalues(&alpha, &beta);
        math::abs(evs[0]).max(math::abs(evs[evs.len() - 1]))
    }

    /// Exact maximum of the combined diagonal (z-z terms plus the field
    /// term); one component of the spectral bound.
    pub fn diag_field_max(&self, field_coeff: f64) -> f64 {
        let n = self.dim();
        let app_mask = self.app_mask;
        let half = self.half_n_app;
        let diag = &self.diag;
        let partials = max_partials(n, |lo, hi| {
            let mut m = 0.0f64;
            for b in lo..hi {
                let mz = (b & app_mask).count_ones() as f64 - half;
                m = m.max(math::abs(diag[b] + field_coeff * mz));
            }
            m
        });
        partials.into_iter().fold(0.0f64, f64::max)
    }

    /// Guaranteed upper bound on `‖H_linear + field_coeff · M_z‖`: the exact
    /// maximum of the combined diagonal plus the triangle-inequality sum of
    /// the flip-term norms.
    pub fn bound_with_field(&self, field_coeff: f64) -> f64 {
        self.diag_field_max(field_coeff) + self.flip_bound
    }

    /// Apparatus magnetization `⟨psi|M_z|psi⟩ / ⟨psi|psi⟩`-numerator and the
    /// squared norm, fused into a single pass.
    pub fn field_and_norm_sqr(&self, psi: &[C64]) -> (f64, f64) {
        let app_mask = self.app_mask;
        let half = self.half_n_app;
        let pairs = sum_pairs(psi.len(), |lo, hi| {
            let mut f = 0.0;
            let mut n = 0.0;
            for b in lo..hi {
                let w = psi[b].norm_sqr();
                let mz = (b & app_mask).count_ones() as f64 - half;
                f += w * mz;
                n += w;
            }
            (f, n)
        });
        let mut field = 0.0;
        let mut norm2 = 0.0;
        for (f, n) in pairs {
            field += f;
            norm2 += n;
        }
        (field, norm2)
    }
}

fn block_len(dim: usize) -> usize {
    dim.min(1 << BLOCK_BITS)
}

// Complex<f64> is repr(C) as [re, im], so a slice of amplitudes can be
// viewed as interleaved doubles for the vectorized inner loops.
#[inline(always)]
fn as_f64s(s: &[C64]) -> &[f64] {
    unsafe { core::slice::from_raw_parts(s.as_ptr() as *const f64, s.len() * 2) }
}

#[inline(always)]
fn as_f64s_mut(s: &mut [C64]) -> &mut [f64] {
    unsafe { core::slice::from_raw_parts_mut(s.as_mut_ptr() as *mut f64, s.len() * 2) }
}

/// `dst += c * src`; the function boundary re-establishes no-alias slices
/// so the loop vectorizes.
#[inline(always)]
fn axpy_f64(dst: &mut [f64], src: &[f64], c: f64) {
    let n = dst.len().min(src.len());
    let (dst, src) = (&mut dst[..n], &src[..n]);
    for k in 0..n {
        dst[k] += c * src[k];
    }
}

fn fill_diag(diag: &mut [f64], zterms: &[(u32, u32, f64)]) {
    let work = |lo: usize, hi: usize, diag: &mut [f64]| {
        for b in lo..hi {
            let mut acc = 0.0;
            for &(bi, bj, w) in zterms {
                let parity = ((b >> bi) ^ (b >> bj)) & 1;
                acc += if parity == 0 { w } else { -w };
            }
            diag[b - lo] = acc;
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let block = block_len(diag.len());
        diag.par_chunks_mut(block).enumerate().for_each(|(bi, chunk)| {
            work(bi * block, bi * block + chunk.len(), chunk);
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        let n = diag.len();
        work(0, n, diag);
    }
}

fn max_partials<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let chunk = math::SUM_CHUNK;
    let chunks = n.div_ceil(chunk).max(1);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| f(c * chunk, (c * chunk + chunk).min(n)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks)
            .map(|c| f(c * chunk, (c * chunk + chunk).min(n)))
            .collect()
    }
}

fn sum_pairs<F>(n: usize, f: F) -> Vec<(f64, f64)>
where
    F: Fn(usize, usize) -> (f64, f64) + Sync,
{
    let chunk = math::SUM_CHUNK;
    let chunks = n.div_ceil(chunk).max(1);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| f(c * chunk, (c * chunk + chunk).min(n)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks)
            .map(|c| f(c * chunk, (c * chunk + chunk).min(n)))
            .collect()
    }
}

/// `b̃ = ⟨psi|Σ_{i∈A} S_i^z|psi⟩` as a plain inner product.
pub fn magnetization_field(psi: &StateVector, c: &CouplingSet) -> Result<FieldValue> {
    let layout = c.layout();
    if psi.sites() != layout.num_sites() {
        return Err(usage("state dimension does not match coupling set"));
    }
    let app_mask = layout.apparatus_mask();
    let half = c.config.n_a as f64 * 0.5;
    let amp = psi.amplitudes();
    let b_tilde = math::sum_f64(psi.dim(), |b| {
        amp[b].norm_sqr() * ((b & app_mask).count_ones() as f64 - half)
    });
    Ok(FieldValue { b_tilde })
}

/// `(H_A + H_E + H_AE + H_SA + H_SE) psi`, matrix-free.
pub fn apply_linear_hamiltonian(c: &CouplingSet, psi: &StateVector) -> Result<StateVector> {
    if psi.sites() != c.num_sites() {
        return Err(usage("state dimension does not match coupling set"));
    }
    let kernel = HamiltonianKernel::new(c);
    let mut out = StateVector::zero(psi.sites());
    kernel.apply(0.0, psi.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// `H_B psi = -μ b̃ (Σ_{j∈A} S_j^z) psi` for a caller-frozen field value.
pub fn apply_nonlinear_term(
    c: &CouplingSet,
    field: FieldValue,
    psi: &StateVector,
) -> Result<StateVector> {
    if psi.sites() != c.num_sites() {
        return Err(usage("state dimension does not match coupling set"));
    }
    let layout = c.layout();
    let app_mask = layout.apparatus_mask();
    let half = c.config.n_a as f64 * 0.5;
    let coeff = -c.config.mu * field.b_tilde;
    let mut out = StateVector::zero(psi.sites());
    let src = psi.amplitudes();
    for (b, dst) in out.amplitudes_mut().iter_mut().enumerate() {
        let mz = (b & app_mask).count_ones() as f64 - half;
        *dst = src[b] * (coeff * mz);
    }
    Ok(out)
}

/// Energy splitting `μ n_a² / 4` between the fully polarized pointer states
/// induced by the self-field; cross-checks `apply_nonlinear_term`.
pub fn degeneracy_split(mu: f64, n_a: usize) -> f64 {
    mu * (n_a * n_a) as f64 / 4.0
}

/// Triangle-inequality upper bound on the spectral radius of
/// `H_linear + H_B(field)` for any `|b̃| ≤ field_cap`.
pub fn spectral_bound(c: &CouplingSet, field_cap: f64) -> f64 {
    let kernel = HamiltonianKernel::new(c);
    kernel.bound_with_field(0.0) + c.config.mu * field_cap * (c.config.n_a as f64 * 0.5)
}
