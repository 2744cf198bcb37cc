//! Dense brute-force references for the matrix-free solvers.
//!
//! Everything here takes the slow, obvious route on purpose: Hamiltonians
//! are materialized as dense matrices from Kronecker products of single-site
//! spin matrices, ground states come from a full symmetric eigensolver, and
//! propagation applies the matrix exponential through an explicit
//! eigendecomposition. Intended for dimensions up to a few thousand.

use collapse_core::model::CouplingSet;
use collapse_core::C64;
use nalgebra::{DMatrix, DVector};

/// Spin-1/2 matrix `S^α = σ^α / 2` in the basis (index 0 = down, 1 = up).
pub fn spin_half(axis: char) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let e = match axis {
        'x' => [z, C64::new(0.5, 0.0), C64::new(0.5, 0.0), z],
        'y' => [z, C64::new(0.0, 0.5), C64::new(0.0, -0.5), z],
        'z' => [C64::new(-0.5, 0.0), z, z, C64::new(0.5, 0.0)],
        _ => panic!("axis must be x, y or z"),
    };
    DMatrix::from_row_slice(2, 2, &e)
}

/// Add `Σ_α t_α S_i^α S_j^α` to a dense Hamiltonian via the Kronecker
/// product of single-site matrices, embedded by explicit bit surgery.
fn add_pair(h: &mut DMatrix<C64>, n_sites: usize, i: usize, j: usize, t: [f64; 3]) {
    let dim = 1usize << n_sites;
    let mut op4 = DMatrix::<C64>::zeros(4, 4);
    for (axis, w) in ['x', 'y', 'z'].into_iter().zip(t) {
        if w != 0.0 {
            let s = spin_half(axis);
            op4 += s.kronecker(&s).map(|v| v * w); // index = s_j * 2 + s_i
        }
    }
    let mi = 1usize << i;
    let mj = 1usize << j;
    for b in 0..dim {
        let row4 = (((b >> i) & 1) + 2 * ((b >> j) & 1)) as usize;
        for si in 0..2usize {
            for sj in 0..2usize {
                let col4 = si + 2 * sj;
                let v = op4[(row4, col4)];
                if v != C64::new(0.0, 0.0) {
                    let mut col = b & !(mi | mj);
                    if si == 1 {
                        col |= mi;
                    }
                    if sj == 1 {
                        col |= mj;
                    }
                    h[(b, col)] += v;
                }
            }
        }
    }
}

fn assert_real_symmetric(h: &DMatrix<C64>) -> DMatrix<f64> {
    let dim = h.nrows();
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            assert!(
                h[(r, c)].im.abs() < 1e-13,
                "dense Hamiltonian has an imaginary element at ({r},{c})"
            );
            out[(r, c)] = h[(r, c)].re;
        }
    }
    for r in 0..dim {
        for c in 0..r {
            assert!(
                (out[(r, c)] - out[(c, r)]).abs() < 1e-12,
                "dense Hamiltonian is not symmetric at ({r},{c})"
            );
        }
    }
    out
}

/// Materialize the full linear Hamiltonian as a dense real symmetric matrix.
pub fn dense_hamiltonian(c: &CouplingSet) -> DMatrix<f64> {
    let n = c.num_sites();
    let dim = 1usize << n;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for p in &c.apparatus {
        add_pair(&mut h, n, p.i, p.j, [-p.x, -p.y, -p.z]);
    }
    for p in c.app_env.iter().chain(c.env.iter()).chain(c.sys_env.iter()) {
        add_pair(&mut h, n, p.i, p.j, [p.x, p.y, p.z]);
    }
    for (k, g) in c.sys_app.iter().enumerate() {
        add_pair(&mut h, n, 0, 1 + k, [0.0, 0.0, -g]);
    }
    assert_real_symmetric(&h)
}

/// Materialize the environment Hamiltonian alone on `n_e` sites.
pub fn dense_environment_hamiltonian(c: &CouplingSet) -> DMatrix<f64> {
    let n = c.config.n_e;
    let dim = 1usize << n;
    let offset = 1 + c.config.n_a;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for p in &c.env {
        add_pair(&mut h, n, p.i - offset, p.j - offset, [p.x, p.y, p.z]);
    }
    assert_real_symmetric(&h)
}

/// Diagonal of the apparatus magnetization operator `M_z = Σ_{i∈A} S_i^z`.
pub fn apparatus_mz_diag(c: &CouplingSet) -> DVector<f64> {
    let dim = c.dim();
    let mask = c.layout().apparatus_mask();
    let half = c.config.n_a as f64 * 0.5;
    DVector::from_fn(dim, |b, _| (b & mask).count_ones() as f64 - half)
}

/// Lowest eigenpair from a full dense diagonalization.
pub fn dense_ground_state(h: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = h.clone().symmetric_eigen();
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] < eig.eigenvalues[best] {
            best = k;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into())
}

/// All eigenvalues, ascending.
pub fn dense_spectrum(h: &DMatrix<f64>) -> Vec<f64> {
    let eig = h.clone().symmetric_eigen();
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Exact propagator `exp(-i dt H)` for a fixed dense Hamiltonian, applied
/// through the eigendecomposition `H = V diag(λ) Vᵀ`.
pub struct DensePropagator {
    evals: DVector<f64>,
    evecs: DMatrix<f64>,
}

impl DensePropagator {
    pub fn new(h: &DMatrix<f64>) -> Self {
        let eig = h.clone().symmetric_eigen();
        DensePropagator {
            evals: eig.eigenvalues,
            evecs: eig.eigenvectors,
        }
    }

    pub fn apply(&self, psi: &[C64], dt: f64) -> Vec<C64> {
        let dim = psi.len();
        // coeffs = Vᵀ psi
        let mut coeff = vec![C64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dim {
                acc += psi[b] * self.evecs[(b, k)];
            }
            let phase = -self.evals[k] * dt;
            coeff[k] = acc * C64::new(phase.cos(), phase.sin());
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for b in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim {
                acc += coeff[k] * self.evecs[(b, k)];
            }
            out[b] = acc;
        }
        out
    }
}

/// Field update rule mirrored from the matrix-free evolution loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseFieldUpdate {
    SelfConsistentMidpoint,
    FrozenStart,
}

/// One recorded step of a dense reference trajectory.
pub struct DenseStep {
    pub t: f64,
    pub state: Vec<C64>,
    pub b_tilde: f64,
}

/// Dense reference evolution with the same per-step frozen-field scheme as
/// the matrix-free loop: the field is frozen within each step, either at its
/// start value or at the self-consistent midpoint, and each frozen step is
/// the exact matrix exponential.
pub fn dense_evolve(
    c: &CouplingSet,
    psi0: &[C64],
    dt: f64,
    steps: usize,
    update: DenseFieldUpdate,
    field_tolerance: f64,
) -> Result<Vec<DenseStep>, String> {
    let h_lin = dense_hamiltonian(c);
    let mz = apparatus_mz_diag(c);
    let mu = c.config.mu;
    let dim = psi0.len();
    let field_of = |psi: &[C64]| -> f64 {
        (0..dim).map(|b| psi[b].norm_sqr() * mz[b]).sum()
    };
    let step_with = |psi: &[C64], b_bar: f64| -> Vec<C64> {
        let mut h = h_lin.clone();
        for b in 0..dim {
            h[(b, b)] += -mu * b_bar * mz[b];
        }
        DensePropagator::new(&h).apply(psi, dt)
    };

    let mut out = Vec::with_capacity(steps + 1);
    let mut psi: Vec<C64> = psi0.to_vec();
    let mut b0 = field_of(&psi);
    out.push(DenseStep {
        t: 0.0,
        state: psi.clone(),
        b_tilde: b0,
    });
    let mut b_prev = b0;
    for s in 0..steps {
        let next = if mu == 0.0 || update == DenseFieldUpdate::FrozenStart {
            step_with(&psi, b0)
        } else {
            // Self-consistent midpoint via damped fixed-point iteration.
            let mut b_bar = b0 + 0.5 * (b0 - b_prev);
            let mut trial = step_with(&psi, b_bar);
            let mut converged = false;
            for _ in 0..64 {
                let b1 = field_of(&trial);
                let target = 0.5 * (b0 + b1);
                if (target - b_bar).abs() <= field_tolerance {
                    converged = true;
                    break;
                }
                b_bar = target;
                trial = step_with(&psi, b_bar);
            }
            if !converged {
                return Err(format!("dense midpoint iteration stalled at step {s}"));
            }
            trial
        };
        b_prev = b0;
        psi = next;
        b0 = field_of(&psi);
        out.push(DenseStep {
            t: (s + 1) as f64 * dt,
            state: psi.clone(),
            b_tilde: b0,
        });
    }
    Ok(out)
}
