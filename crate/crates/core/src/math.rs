//! Float shims (std vs. libm) and deterministic reductions.
//!
//! Every sum over basis amplitudes goes through [`sum_f64`] / [`sum_c64`],
//! which split the index range into fixed-size chunks, reduce each chunk
//! sequentially and then fold the chunk partials in order. The parallel
//! feature distributes chunks over threads but keeps the identical
//! summation tree, so results do not depend on the thread count.

use crate::hilbert::C64;
use alloc::vec::Vec;

#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.sqrt()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::sqrt(x)
    }
}

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.abs()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::fabs(x)
    }
}

#[inline(always)]
pub fn sin(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.sin()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::sin(x)
    }
}

#[inline(always)]
pub fn cos(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.cos()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::cos(x)
    }
}

/// Chunk length for deterministic reductions (2^12 elements).
pub const SUM_CHUNK: usize = 1 << 12;

/// Deterministic chunked sum of `f(i)` over `0..n`.
pub fn sum_f64<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials = chunk_partials(n, |lo, hi| {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partials.into_iter().sum()
}

/// Deterministic chunked complex sum of `f(i)` over `0..n`.
pub fn sum_c64<F>(n: usize, f: F) -> C64
where
    F: Fn(usize) -> C64 + Sync,
{
    let partials = chunk_partials(n, |lo, hi| {
        let mut acc = C64::new(0.0, 0.0);
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    let mut total = C64::new(0.0, 0.0);
    for p in partials {
        total += p;
    }
    total
}

#[cfg(feature = "parallel")]
fn chunk_partials<T, G>(n: usize, g: G) -> Vec<T>
where
    T: Send,
    G: Fn(usize, usize) -> T + Sync,
{
    use rayon::prelude::*;
    let chunks = n.div_ceil(SUM_CHUNK).max(1);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * SUM_CHUNK;
            let hi = (lo + SUM_CHUNK).min(n);
            g(lo, hi)
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn chunk_partials<T, G>(n: usize, g: G) -> Vec<T>
where
    G: Fn(usize, usize) -> T,
{
    let chunks = n.div_ceil(SUM_CHUNK).max(1);
    (0..chunks)
        .map(|c| {
            let lo = c * SUM_CHUNK;
            let hi = (lo + SUM_CHUNK).min(n);
            g(lo, hi)
        })
        .collect()
}

/// `t_next = scale * t_next - t_prev`, elementwise (Chebyshev recurrence).
pub fn recurrence_update(t_next: &mut [C64], t_prev: &[C64], scale: f64) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        t_next
            .par_chunks_mut(SUM_CHUNK)
            .zip(t_prev.par_chunks(SUM_CHUNK))
            .for_each(|(n, p)| {
                for k in 0..n.len() {
                    n[k] = n[k] * scale - p[k];
                }
            });
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (n, p) in t_next.iter_mut().zip(t_prev.iter()) {
            *n = *n * scale - p;
        }
    }
}

/// `out += c * t`, elementwise.
pub fn accumulate(out: &mut [C64], t: &[C64], c: C64) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(SUM_CHUNK)
            .zip(t.par_chunks(SUM_CHUNK))
            .for_each(|(o, s)| {
                for k in 0..o.len() {
                    o[k] += c * s[k];
                }
            });
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (o, s) in out.iter_mut().zip(t.iter()) {
            *o += c * s;
        }
    }
}

/// `dst = c * src`, elementwise.
pub fn scaled_copy(dst: &mut [C64], src: &[C64], c: f64) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d = s * c;
    }
}
