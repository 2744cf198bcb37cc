//! Symmetric tridiagonal eigenvalue machinery for the Lanczos solver:
//! implicit-shift QL for eigenvalues and inverse iteration for one
//! eigenvector. Matrices here are tiny (the Krylov dimension), so clarity
//! beats cleverness.

use crate::math;
use alloc::vec;
use alloc::vec::Vec;

#[inline]
fn pythag(a: f64, b: f64) -> f64 {
    let (a, b) = (math::abs(a), math::abs(b));
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == 0.0 {
        0.0
    } else {
        let r = small / big;
        big * math::sqrt(1.0 + r * r)
    }
}

/// All eigenvalues of the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e[k]` couples rows `k` and `k+1`), ascending.
/// Implicit-shift QL.
pub fn eigenvalues(d_in: &[f64], e_in: &[f64]) -> Vec<f64> {
    let n = d_in.len();
    if n == 0 {
        return Vec::new();
    }
    let mut d = d_in.to_vec();
    let mut e = vec![0.0f64; n];
    if n > 1 {
        e[..n - 1].copy_from_slice(&e_in[..n - 1]);
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(d[m]) + math::abs(d[m + 1]);
                if math::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "tridiagonal QL failed to converge");

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g == 0.0 { 1.0 } else { g }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut broke = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    broke = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if broke {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

/// Lowest eigenvalue and its eigenvector via inverse iteration.
pub fn lowest_eigenpair(d: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
    let n = d.len();
    if n == 1 {
        return (d[0], vec![1.0]);
    }
    let evs = eigenvalues(d, e);
    let theta = evs[0];
    // Shift slightly off the eigenvalue so the solve stays nonsingular.
    let scale = math::abs(theta).max(1.0);
    let shift = theta - 1e-12 * scale;

    let mut v = vec![1.0 / math::sqrt(n as f64); n];
    for _ in 0..3 {
        v = solve_shifted(d, e, shift, &v);
        let norm = math::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        for x in &mut v {
            *x /= norm;
        }
    }
    (theta, v)
}

/// Solve `(T - shift) x = b` for tridiagonal `T` by LU with partial
/// pivoting (stable next to an eigenvalue).
fn solve_shifted(d: &[f64], e: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    // Bands: sub (a), diag (m), super (c), second super (f) from pivot fill.
    let mut a = vec![0.0; n];
    let mut m: Vec<f64> = d.iter().map(|x| x - shift).collect();
    let mut c = vec![0.0; n];
    let mut f = vec![0.0; n];
    for k in 0..n - 1 {
        a[k + 1] = e[k];
        c[k] = e[k];
    }
    let mut x = b.to_vec();
    for k in 0..n - 1 {
        if math::abs(a[k + 1]) > math::abs(m[k]) {
            // Swap rows k and k+1.
            core::mem::swap(&mut m[k], &mut a[k + 1]);
            core::mem::swap(&mut c[k], &mut m[k + 1]);
            if k + 2 < n {
                f[k] = c[k + 1];
                c[k + 1] = 0.0;
            }
            x.swap(k, k + 1);
        }
        let denom = if m[k] != 0.0 { m[k] } else { 1e-300 };
        let l = a[k + 1] / denom;
        m[k + 1] -= l * c[k];
        if k + 2 < n {
            c[k + 1] -= l * f[k];
        }
        x[k + 1] -= l * x[k];
    }
    // Back substitution.
    let mut out = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = x[k];
        if k + 1 < n {
            s -= c[k] * out[k + 1];
        }
        if k + 2 < n {
            s -= f[k] * out[k + 2];
        }
        let denom = if m[k] != 0.0 { m[k] } else { 1e-300 };
        out[k] = s / denom;
    }
    out
}
