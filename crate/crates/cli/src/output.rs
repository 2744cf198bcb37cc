//! Deterministic output artifacts: trajectory tables, run summaries, and
//! ensemble reports. Files embed the artifact version, the full resolved
//! configuration, all seeds, and the numerical convention notes, so a run
//! can be reproduced byte-identically from any one of its outputs.

use crate::config::RootConfig;
use anyhow::{Context, Result};
use collapse_core::experiment::{BornCurve, Classification, RunOutcome};
use collapse_core::observables::ObservableRecord;
use collapse_core::solvers::evolve::EvolveStats;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const TRAJECTORY_HEADER: &str = "t,M,E_exch,S_sys_z,B_field,norm,E_U";

/// Numerical conventions baked into the solver, echoed into every output.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub propagator: &'static str,
    pub pair_sums: &'static str,
    pub random_couplings: &'static str,
    pub spin_y: &'static str,
    pub system_apparatus_coupling: &'static str,
    pub field_freezing: &'static str,
    pub apparatus_order: &'static str,
    pub seed_derivation: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            propagator: "forward evolution exp(-i H t), hbar = 1, J = 1",
            pair_sums: "all bilinear sums run over unordered pairs i < j, counted once",
            random_couplings: "independent uniform draw per axis from per-family ChaCha8 streams",
            spin_y: "S^y = (S^+ - S^-)/2i with S^+|down> = |up>",
            system_apparatus_coupling:
                "ferromagnetic: -Gamma_i S_sys^z S_i^z, so the measured spin biases the apparatus toward its own direction",
            field_freezing:
                "self-consistent midpoint by default: each step freezes b at the solution of b = (b(t) + b(t+dt))/2, which conserves E_U exactly",
            apparatus_order:
                "apparatus sites follow a Gray-code walk of the rectangle/cube, so |up,down,...> alternating by site index is the geometric checkerboard",
            seed_derivation:
                "coupling/lanczos seeds = splitmix64(base ^ counter * 0x9E3779B97F4A7C15), counter = (theta_index * 2^24 + run_index) * 2 + {0: coupling, 1: lanczos}",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ArtifactInfo {
    fn default() -> Self {
        ArtifactInfo {
            name: "collapse",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedSet {
    pub base_seed: Option<u64>,
    pub coupling_seed: u64,
    pub lanczos_seed: u64,
}

/// 15-significant-digit decimal text; round-trips through `f64` parsing to
/// the same displayed precision.
pub fn fmt_g15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Write a trajectory table: commented metadata, the exact column header,
/// then one row per record.
pub fn write_trajectory(
    path: &Path,
    config: &RootConfig,
    seeds: &SeedSet,
    theta_degrees: f64,
    phi_degrees: f64,
    records: &[ObservableRecord],
) -> Result<()> {
    let mut buf = String::new();
    let artifact = ArtifactInfo::default();
    buf.push_str(&format!("# {} {}\n", artifact.name, artifact.version));
    buf.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(config).context("serializing config")?
    ));
    buf.push_str(&format!(
        "# seeds: {}\n",
        serde_json::to_string(seeds).context("serializing seeds")?
    ));
    buf.push_str(&format!(
        "# theta_degrees: {theta_degrees}, phi_degrees: {phi_degrees}\n"
    ));
    buf.push_str(&format!(
        "# conventions: {}\n",
        serde_json::to_string(&Conventions::default()).context("serializing conventions")?
    ));
    buf.push_str(TRAJECTORY_HEADER);
    buf.push('\n');
    for r in records {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_g15(r.t),
            fmt_g15(r.m),
            fmt_g15(r.e_exch),
            fmt_g15(r.s_sys_z),
            fmt_g15(r.b_tilde),
            fmt_g15(r.norm),
            fmt_g15(r.e_u)
        ));
    }
    write_atomic(path, buf.as_bytes())
}

/// Parse a trajectory table back (skipping comment lines); used by the
/// round-trip tests and available for downstream tooling.
pub fn read_trajectory(path: &Path) -> Result<Vec<ObservableRecord>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trajectory {}", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line == TRAJECTORY_HEADER || line.is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>().context("parsing trajectory value"))
            .collect::<Result<_>>()?;
        anyhow::ensure!(cols.len() == 7, "expected 7 columns, got {}", cols.len());
        out.push(ObservableRecord {
            t: cols[0],
            m: cols[1],
            e_exch: cols[2],
            s_sys_z: cols[3],
            b_tilde: cols[4],
            norm: cols[5],
            e_u: cols[6],
        });
    }
    Ok(out)
}

fn classification_str(c: Classification) -> &'static str {
    match c {
        Classification::CollapsedUp => "collapsed_up",
        Classification::CollapsedDown => "collapsed_down",
        Classification::Undecided => "undecided",
    }
}

#[derive(Serialize)]
pub struct OutcomeJson {
    pub classification: &'static str,
    pub collapse_time: Option<f64>,
    pub final_m: f64,
    pub final_s_sys_z: f64,
}

impl From<&RunOutcome> for OutcomeJson {
    fn from(o: &RunOutcome) -> Self {
        OutcomeJson {
            classification: classification_str(o.classification),
            collapse_time: o.collapse_time,
            final_m: o.final_m,
            final_s_sys_z: o.final_s_sys_z,
        }
    }
}

#[derive(Serialize)]
pub struct StatsJson {
    pub steps: usize,
    pub propagator_applications: usize,
    pub kernel_applies: usize,
    pub max_chebyshev_order: usize,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    pub bound_fallbacks: usize,
}

impl From<&EvolveStats> for StatsJson {
    fn from(s: &EvolveStats) -> Self {
        StatsJson {
            steps: s.steps,
            propagator_applications: s.propagator_applications,
            kernel_applies: s.kernel_applies,
            max_chebyshev_order: s.max_chebyshev_order,
            max_norm_drift: s.max_norm_drift,
            max_energy_drift: s.max_energy_drift,
            bound_fallbacks: s.bound_fallbacks,
        }
    }
}

#[derive(Serialize)]
pub struct RunSummary<'a> {
    pub artifact: ArtifactInfo,
    pub conventions: Conventions,
    pub config: &'a RootConfig,
    pub seeds: SeedSet,
    pub theta_degrees: f64,
    pub phi_degrees: f64,
    pub environment_ground_energy: f64,
    pub outcome: OutcomeJson,
    pub stats: StatsJson,
    pub records: usize,
    pub trajectory_file: String,
}

#[derive(Serialize)]
pub struct BornPointJson {
    pub theta_degrees: f64,
    pub n_runs: usize,
    pub n_up: usize,
    pub n_down: usize,
    pub n_undecided: usize,
    pub n_failed: usize,
    pub decided_fraction: f64,
    pub p_up_estimate: Option<f64>,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub reference_cos2: f64,
}

#[derive(Serialize)]
pub struct EnsembleRunJson {
    pub theta_degrees: f64,
    pub run_index: usize,
    pub coupling_seed: u64,
    pub lanczos_seed: u64,
    pub outcome: Option<OutcomeJson>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct EnsembleSummary<'a> {
    pub artifact: ArtifactInfo,
    pub conventions: Conventions,
    pub config: &'a RootConfig,
    pub base_seed: u64,
    pub points: Vec<BornPointJson>,
    pub runs: Vec<EnsembleRunJson>,
    pub wall_clock_seconds: f64,
}

pub fn ensemble_summary<'a>(
    config: &'a RootConfig,
    base_seed: u64,
    curve: &BornCurve,
    wall_clock_seconds: f64,
) -> EnsembleSummary<'a> {
    let points = curve
        .points
        .iter()
        .map(|p| BornPointJson {
            theta_degrees: p.theta.to_degrees(),
            n_runs: p.n_runs,
            n_up: p.n_up,
            n_down: p.n_down,
            n_undecided: p.n_undecided,
            n_failed: p.n_failed,
            decided_fraction: (p.n_up + p.n_down) as f64 / p.n_runs.max(1) as f64,
            p_up_estimate: p.p_up_estimate,
            ci95_low: p.ci95.0,
            ci95_high: p.ci95.1,
            reference_cos2: p.reference,
        })
        .collect();
    let runs = curve
        .runs
        .iter()
        .map(|r| EnsembleRunJson {
            theta_degrees: curve.points[r.theta_index].theta.to_degrees(),
            run_index: r.run_index,
            coupling_seed: r.coupling_seed,
            lanczos_seed: r.lanczos_seed,
            outcome: r.outcome.as_ref().map(OutcomeJson::from),
            error: r.error.clone(),
        })
        .collect();
    EnsembleSummary {
        artifact: ArtifactInfo::default(),
        conventions: Conventions::default(),
        config,
        base_seed,
        points,
        runs,
        wall_clock_seconds,
    }
}

/// Companion CSV of the Born curve for plotting.
pub fn write_born_csv(path: &Path, summary: &EnsembleSummary<'_>) -> Result<()> {
    let mut buf = String::from(
        "theta_deg,n_runs,n_up,n_down,n_undecided,n_failed,p_up,ci95_low,ci95_high,cos2_theta\n",
    );
    for p in &summary.points {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p.theta_degrees,
            p.n_runs,
            p.n_up,
            p.n_down,
            p.n_undecided,
            p.n_failed,
            p.p_up_estimate.map(fmt_g15).unwrap_or_default(),
            fmt_g15(p.ci95_low),
            fmt_g15(p.ci95_high),
            fmt_g15(p.reference_cos2)
        ));
    }
    write_atomic(path, buf.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    write_atomic(path, format!("{text}\n").as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all().ok();
    }
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g15_round_trips_to_displayed_precision() {
        for &x in &[
            0.0,
            1.0,
            -0.3333333333333333,
            1.2345678901234567e-7,
            -9.87654321098765e12,
            std::f64::consts::PI,
        ] {
            let s = fmt_g15(x);
            let back: f64 = s.parse().unwrap();
            let rel = if x == 0.0 {
                back.abs()
            } else {
                ((back - x) / x).abs()
            };
            assert!(rel < 1e-14, "{x} -> {s} -> {back}");
        }
    }
}
