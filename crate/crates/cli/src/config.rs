//! Layered configuration: a TOML file (all keys optional), `--set` dotted
//! overrides, and validated conversion into the core solver configs.

use anyhow::{anyhow, bail, Context, Result};
use collapse_core::experiment::OutcomeCriteria;
use collapse_core::model::ModelConfig;
use collapse_core::solvers::evolve::FieldUpdate;
use collapse_core::solvers::lanczos::{LanczosConfig, Reorthogonalization};
use collapse_core::{ChebyshevConfig, TrajectoryConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RootConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub chebyshev: ChebyshevSection,
    #[serde(default)]
    pub lanczos: LanczosSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n_a: usize,
    pub n_e: usize,
    pub gamma: f64,
    pub delta: f64,
    pub omega: f64,
    pub theta: f64,
    /// Defaults to 12 for n_a = 4 and 6 for n_a = 8 (constant mu * n_a).
    pub mu: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            n_a: 4,
            n_e: 15,
            gamma: 0.1,
            delta: 0.3,
            omega: 0.8,
            theta: 0.5,
            mu: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub dt: f64,
    pub t_max: f64,
    pub record_stride: usize,
    pub norm_tolerance: f64,
    pub energy_tolerance: f64,
    pub field_tolerance: f64,
    pub max_field_iterations: usize,
    /// "midpoint" (self-consistent) or "frozen-start".
    pub field_update: String,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        let d = TrajectoryConfig::default();
        TrajectorySection {
            dt: d.dt,
            t_max: d.t_max,
            record_stride: d.record_stride,
            norm_tolerance: d.norm_tolerance,
            energy_tolerance: d.energy_tolerance,
            field_tolerance: d.field_tolerance,
            max_field_iterations: d.max_field_iterations,
            field_update: "midpoint".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChebyshevSection {
    pub truncation_tolerance: f64,
    pub max_order: usize,
}

impl Default for ChebyshevSection {
    fn default() -> Self {
        let d = ChebyshevConfig::default();
        ChebyshevSection {
            truncation_tolerance: d.truncation_tolerance,
            max_order: d.max_order,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LanczosSection {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    /// "full" or "none".
    pub reorthogonalization: String,
}

impl Default for LanczosSection {
    fn default() -> Self {
        let d = LanczosConfig::default();
        LanczosSection {
            max_iterations: d.max_iterations,
            residual_tolerance: d.residual_tolerance,
            reorthogonalization: "full".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub theta_grid_degrees: Vec<f64>,
    pub phi_degrees: f64,
    pub runs_per_theta: usize,
    /// Defaults to half of full polarization, 0.25 * n_a.
    pub m_threshold: Option<f64>,
    pub dwell: f64,
    pub base_seed: u64,
    pub keep_trajectories: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            theta_grid_degrees: vec![0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0],
            phi_degrees: 0.0,
            runs_per_theta: 96,
            m_threshold: None,
            dwell: 20.0,
            base_seed: 1,
            keep_trajectories: false,
        }
    }
}

impl RootConfig {
    /// Parse from TOML text; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RootConfig = toml::from_str(text).context("parsing configuration")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Apply a dotted-path override like `model.mu=6.0`.
    pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("override '{spec}' must be key.path=value"))?;
        let parsed: toml::Value = match value.parse::<toml::Value>() {
            Ok(v) => v,
            Err(_) => toml::Value::String(value.to_string()),
        };
        let mut node = table;
        let parts: Vec<&str> = path.split('.').collect();
        for (k, part) in parts.iter().enumerate() {
            if k + 1 == parts.len() {
                node.insert(part.to_string(), parsed);
                break;
            }
            node = node
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| anyhow!("override path '{path}' crosses a non-table key"))?;
        }
        Ok(())
    }

    /// Load the file (or defaults), apply `--set` overrides, re-validate.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?,
            None => String::new(),
        };
        let mut table: toml::Table = toml::from_str(&text).context("parsing configuration")?;
        for spec in overrides {
            Self::apply_override(&mut table, spec)?;
        }
        let cfg: RootConfig =
            toml::Value::Table(table).try_into().context("applying overrides")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks with the offending key in the message.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !matches!(m.n_a, 4 | 8) {
            bail!("model.n_a must be 4 or 8, got {}", m.n_a);
        }
        if m.n_e < 1 {
            bail!("model.n_e must be >= 1, got {}", m.n_e);
        }
        if 1 + m.n_a + m.n_e > 28 {
            bail!(
                "model.n_a + model.n_e too large: 2^{} amplitudes will not fit in memory",
                1 + m.n_a + m.n_e
            );
        }
        if !(m.gamma > 0.0 && m.gamma <= 1.0) {
            bail!("model.gamma must lie in (0, 1], got {}", m.gamma);
        }
        for (key, v) in [("delta", m.delta), ("omega", m.omega), ("theta", m.theta)] {
            if !(v >= 0.0) {
                bail!("model.{key} must be >= 0, got {v}");
            }
        }
        if let Some(mu) = m.mu {
            if !(mu >= 0.0) {
                bail!("model.mu must be >= 0, got {mu}");
            }
        }
        let t = &self.trajectory;
        if !(t.dt > 0.0) {
            bail!("trajectory.dt must be > 0, got {}", t.dt);
        }
        if t.t_max < t.dt {
            bail!("trajectory.t_max must be >= trajectory.dt");
        }
        if t.record_stride < 1 {
            bail!("trajectory.record_stride must be >= 1");
        }
        for (key, v) in [
            ("norm_tolerance", t.norm_tolerance),
            ("energy_tolerance", t.energy_tolerance),
            ("field_tolerance", t.field_tolerance),
        ] {
            if !(v > 0.0) {
                bail!("trajectory.{key} must be > 0, got {v}");
            }
        }
        if !matches!(t.field_update.as_str(), "midpoint" | "frozen-start") {
            bail!(
                "trajectory.field_update must be 'midpoint' or 'frozen-start', got '{}'",
                t.field_update
            );
        }
        if !(self.chebyshev.truncation_tolerance > 0.0) {
            bail!("chebyshev.truncation_tolerance must be > 0");
        }
        if self.chebyshev.max_order < 1 {
            bail!("chebyshev.max_order must be >= 1");
        }
        if self.lanczos.max_iterations < 1 {
            bail!("lanczos.max_iterations must be >= 1");
        }
        if !(self.lanczos.residual_tolerance > 0.0) {
            bail!("lanczos.residual_tolerance must be > 0");
        }
        if !matches!(self.lanczos.reorthogonalization.as_str(), "full" | "none") {
            bail!(
                "lanczos.reorthogonalization must be 'full' or 'none', got '{}'",
                self.lanczos.reorthogonalization
            );
        }
        let e = &self.experiment;
        if e.runs_per_theta < 1 {
            bail!("experiment.runs_per_theta must be >= 1");
        }
        if e.theta_grid_degrees.is_empty() {
            bail!("experiment.theta_grid_degrees must not be empty");
        }
        for &deg in &e.theta_grid_degrees {
            if !(0.0..=90.0).contains(&deg) {
                bail!("experiment.theta_grid_degrees entries must lie in [0, 90], got {deg}");
            }
        }
        if let Some(thr) = e.m_threshold {
            if !(thr > 0.0) {
                bail!("experiment.m_threshold must be > 0, got {thr}");
            }
        }
        if !(e.dwell >= 0.0) {
            bail!("experiment.dwell must be >= 0");
        }
        Ok(())
    }

    /// `mu` with the size-dependent default (`mu * n_a = 48`).
    pub fn mu(&self) -> f64 {
        self.model
            .mu
            .unwrap_or(if self.model.n_a == 8 { 6.0 } else { 12.0 })
    }

    pub fn m_threshold(&self) -> f64 {
        self.experiment
            .m_threshold
            .unwrap_or(0.25 * self.model.n_a as f64)
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            n_a: self.model.n_a,
            n_e: self.model.n_e,
            gamma: self.model.gamma,
            delta: self.model.delta,
            omega: self.model.omega,
            theta: self.model.theta,
            mu: self.mu(),
        }
    }

    pub fn trajectory_config(&self) -> TrajectoryConfig {
        TrajectoryConfig {
            dt: self.trajectory.dt,
            t_max: self.trajectory.t_max,
            record_stride: self.trajectory.record_stride,
            norm_tolerance: self.trajectory.norm_tolerance,
            energy_tolerance: self.trajectory.energy_tolerance,
            field_tolerance: self.trajectory.field_tolerance,
            max_field_iterations: self.trajectory.max_field_iterations,
            field_update: if self.trajectory.field_update == "frozen-start" {
                FieldUpdate::FrozenStart
            } else {
                FieldUpdate::SelfConsistentMidpoint
            },
        }
    }

    pub fn chebyshev_config(&self) -> ChebyshevConfig {
        ChebyshevConfig {
            truncation_tolerance: self.chebyshev.truncation_tolerance,
            max_order: self.chebyshev.max_order,
        }
    }

    pub fn lanczos_config(&self) -> LanczosConfig {
        LanczosConfig {
            max_iterations: self.lanczos.max_iterations,
            residual_tolerance: self.lanczos.residual_tolerance,
            reorthogonalization: if self.lanczos.reorthogonalization == "none" {
                Reorthogonalization::None
            } else {
                Reorthogonalization::Full
            },
            start_seed: 0,
        }
    }

    pub fn outcome_criteria(&self) -> OutcomeCriteria {
        OutcomeCriteria {
            m_threshold: self.m_threshold(),
            dwell: self.experiment.dwell,
        }
    }
}
