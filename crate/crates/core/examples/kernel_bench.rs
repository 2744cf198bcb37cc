//! Rough wall-clock probe of the Hamiltonian kernel and a short evolution.
//!
//! Usage: cargo run --release -p collapse-core --features parallel --example kernel_bench [n_e]

use collapse_core::model::{build_couplings, HamiltonianKernel, ModelConfig};
use collapse_core::solvers::chebyshev::ChebyshevConfig;
use collapse_core::solvers::evolve::{evolve, TrajectoryConfig};
use collapse_core::solvers::lanczos::{lanczos_ground_state, LanczosConfig};
use collapse_core::C64;
use std::time::Instant;

fn main() {
    let n_e: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(11);
    let cfg = ModelConfig {
        n_a: 4,
        n_e,
        gamma: 0.1,
        delta: 0.3,
        omega: 0.8,
        theta: 0.5,
        mu: 12.0,
    };
    let c = build_couplings(&cfg, 1).unwrap();
    let kernel = HamiltonianKernel::new(&c);
    let dim = c.dim();
    println!("sites = {}, dim = {}", c.num_sites(), dim);

    let mut psi = vec![C64::new(0.0, 0.0); dim];
    let phase = 0.6180339887;
    for (b, a) in psi.iter_mut().enumerate() {
        *a = C64::new(((b as f64) * phase).sin(), ((b as f64) * phase).cos());
    }
    let n = (psi.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt();
    psi.iter_mut().for_each(|a| *a /= n);
    let mut out = vec![C64::new(0.0, 0.0); dim];

    // Warm up + time the raw matvec.
    kernel.apply(-3.0, &psi, &mut out);
    let reps = if dim >= 1 << 20 { 20 } else { 200 };
    let t0 = Instant::now();
    for _ in 0..reps {
        kernel.apply(-3.0, &psi, &mut out);
        std::mem::swap(&mut psi, &mut out);
    }
    let per = t0.elapsed().as_secs_f64() / reps as f64;
    println!("matvec: {:.3} ms", per * 1e3);

    let t0 = Instant::now();
    let r = kernel.bound_with_field(-3.0);
    println!("bound_with_field: {:.3} ms (R = {:.3})", t0.elapsed().as_secs_f64() * 1e3, r);

    // Lanczos ground state of the environment.
    let env_kernel = HamiltonianKernel::environment_only(&c);
    let t0 = Instant::now();
    let (e0, env) = lanczos_ground_state(
        |v, o| env_kernel.apply(0.0, v, o),
        1 << n_e,
        &LanczosConfig::default(),
    )
    .unwrap();
    println!("lanczos: {:.3} s (E0 = {:.6})", t0.elapsed().as_secs_f64(), e0);

    // Short nonlinear evolution to count applies per unit time.
    let psi0 = collapse_core::experiment::prepare_initial_state(
        std::f64::consts::FRAC_PI_4,
        0.0,
        &c,
        &env,
    )
    .unwrap();
    for dt in [0.05, 0.1, 0.2] {
        let traj = TrajectoryConfig {
            dt,
            t_max: 2.0,
            record_stride: usize::MAX / 2,
            ..TrajectoryConfig::default()
        };
        let t0 = Instant::now();
        let outm = evolve(&c, &psi0, &traj, &ChebyshevConfig::default(), |_| {}).unwrap();
        let el = t0.elapsed().as_secs_f64();
        println!(
            "evolve dt={dt}: {:.2} s for t_max=2 ({} applies, {} kernel applies, max order {}) -> est {:.1} min for t=200",
            el,
            outm.stats.propagator_applications,
            outm.stats.kernel_applies,
            outm.stats.max_chebyshev_order,
            el * 100.0 / 60.0,
        );
    }
}
