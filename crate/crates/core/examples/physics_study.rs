//! Empirical study harness: collapse statistics vs. the system-apparatus
//! coupling orientation, magnetization plateau levels, and dt sensitivity.
//!
//! Usage: cargo run --release --features parallel --example physics_study -- <mode>
//!   sign   — up-probability at theta = 0 for both coupling orientations
//!   dt     — decided rates / p_up at theta = 30 deg across dt values
//!   plateau— plateau magnetization stats at theta = 45 deg

use collapse_core::experiment::{
    born_curve_with, Classification, OutcomeCriteria, RunSpec,
};
use collapse_core::model::ModelConfig;
use collapse_core::solvers::chebyshev::ChebyshevConfig;
use collapse_core::solvers::evolve::{FieldUpdate, TrajectoryConfig};
use collapse_core::solvers::lanczos::LanczosConfig;

fn template(n_e: usize, dt: f64, t_max: f64) -> RunSpec {
    RunSpec {
        theta: 0.0,
        phi: 0.0,
        coupling_seed: 0,
        lanczos_seed: 0,
        model: ModelConfig {
            n_a: 4,
            n_e,
            gamma: 0.1,
            delta: 0.3,
            omega: 0.8,
            theta: 0.5,
            mu: 12.0,
        },
        trajectory: TrajectoryConfig {
            dt,
            t_max,
            record_stride: (0.5 / dt).max(1.0) as usize,
            field_update: FieldUpdate::SelfConsistentMidpoint,
            ..TrajectoryConfig::default()
        },
        chebyshev: ChebyshevConfig::default(),
        lanczos: LanczosConfig::default(),
        outcome: OutcomeCriteria::defaults_for(4),
    }
}

fn report(tag: &str, curve: &collapse_core::experiment::BornCurve) {
    for p in &curve.points {
        println!(
            "{tag} theta={:5.1}deg: up={} down={} undecided={} failed={} p_up={:?} ci=({:.3},{:.3})",
            p.theta.to_degrees(),
            p.n_up,
            p.n_down,
            p.n_undecided,
            p.n_failed,
            p.p_up_estimate,
            p.ci95.0,
            p.ci95.1
        );
    }
    for r in &curve.runs {
        if let Some(e) = &r.error {
            println!("  run ({},{}) failed: {e}", r.theta_index, r.run_index);
        }
    }
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "sign".into());
    let t0 = std::time::Instant::now();
    match mode.as_str() {
        "sign" => {
            // theta = 0 (system prepared |↑⟩): with the ferromagnetic
            // system-apparatus orientation the apparatus should collapse up.
            let spec = template(9, 0.2, 80.0);
            let curve = born_curve_with(&[0.0], 16, 1001, &spec, |_, _, traj, out| {
                let m_final = out.final_m;
                let e = traj.records.last().unwrap();
                println!(
                    "  run: outcome {:?} t_c={:?} M_end={:.3} Ssys_end={:.3} E_U drift {:.2e} applies/step {:.2}",
                    out.classification,
                    out.collapse_time,
                    m_final,
                    e.s_sys_z,
                    traj.stats.max_energy_drift,
                    traj.stats.propagator_applications as f64 / traj.stats.steps as f64,
                );
            })
            .unwrap();
            report("ferro", &curve);
        }
        "plateau" => {
            let n_e: usize = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(11);
            let t_max: f64 = std::env::args()
                .nth(3)
                .and_then(|s| s.parse().ok())
                .unwrap_or(150.0);
            let runs: usize = std::env::args()
                .nth(4)
                .and_then(|s| s.parse().ok())
                .unwrap_or(12);
            let spec = template(n_e, 0.2, t_max);
            let curve = born_curve_with(
                &[std::f64::consts::FRAC_PI_4],
                runs,
                777,
                &spec,
                |_, ri, traj, out| {
                    let sample: Vec<String> = traj
                        .records
                        .iter()
                        .filter(|r| (r.t / 25.0).fract().abs() < 1e-9 && r.t > 0.0)
                        .map(|r| format!("M({:.0})={:+.2}", r.t, r.m))
                        .collect();
                    let tail: Vec<f64> = traj
                        .records
                        .iter()
                        .filter(|r| r.t > t_max * 0.6)
                        .map(|r| r.m)
                        .collect();
                    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
                    println!(
                        "  run {ri}: {} | tail mean {:+.3} outcome {:?} tc={:?} Eex_end={:+.3} Ssys_end={:+.3} ap/st {:.2}",
                        sample.join(" "),
                        mean,
                        out.classification,
                        out.collapse_time,
                        traj.records.last().unwrap().e_exch,
                        out.final_s_sys_z,
                        traj.stats.propagator_applications as f64 / traj.stats.steps as f64,
                    );
                },
            )
            .unwrap();
            report("plateau", &curve);
        }
        "dt" => {
            for dt in [0.05, 0.1, 0.2, 0.4] {
                let spec = template(9, dt, 100.0);
                let theta = 30f64.to_radians();
                let curve = born_curve_with(&[theta], 24, 4242, &spec, |_, _, _, _| {}).unwrap();
                print!("dt={dt}: ");
                report("", &curve);
            }
        }
        "grid" => {
            // Parameter sensitivity: gamma, coupling scale, dt, and a mu=0
            // reference, watching the plateau magnetization.
            let cases: Vec<(&str, f64, f64, f64, f64, f64, f64)> = vec![
                // label, gamma, delta, omega, theta_c, mu, dt
                ("base", 0.1, 0.3, 0.8, 0.5, 12.0, 0.2),
                ("g0.5", 0.5, 0.3, 0.8, 0.5, 12.0, 0.2),
                ("g1.0", 1.0, 0.3, 0.8, 0.5, 12.0, 0.2),
                ("doubled", 0.1, 0.6, 1.6, 1.0, 12.0, 0.2),
                ("dt0.05", 0.1, 0.3, 0.8, 0.5, 12.0, 0.05),
                ("linear", 0.1, 0.3, 0.8, 0.5, 0.0, 0.2),
            ];
            for (label, gamma, delta, omega, theta_c, mu, dt) in cases {
                let mut spec = template(11, dt, 120.0);
                spec.model.gamma = gamma;
                spec.model.delta = delta;
                spec.model.omega = omega;
                spec.model.theta = theta_c;
                spec.model.mu = mu;
                let curve = born_curve_with(
                    &[std::f64::consts::FRAC_PI_4],
                    4,
                    909,
                    &spec,
                    |_, ri, traj, out| {
                        let sample: Vec<String> = traj
                            .records
                            .iter()
                            .filter(|r| (r.t / 30.0).fract().abs() < 1e-9 && r.t > 0.0)
                            .map(|r| format!("M({:.0})={:+.2}", r.t, r.m))
                            .collect();
                        println!(
                            "  [{label}] run {ri}: {} out={:?} Eex_end={:+.2} Ssz={:+.2}",
                            sample.join(" "),
                            out.classification,
                            traj.records.last().unwrap().e_exch,
                            out.final_s_sys_z,
                        );
                    },
                )
                .unwrap();
                let p = &curve.points[0];
                println!(
                    "[{label}] up={} down={} undecided={}",
                    p.n_up, p.n_down, p.n_undecided
                );
            }
        }
        other => panic!("unknown mode {other}"),
    }
    println!("elapsed: {:.1} s", t0.elapsed().as_secs_f64());
}
