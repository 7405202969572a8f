//! Experiment configuration: a single JSON document with strict field
//! checking (unknown keys are errors, not typos silently ignored).

use crate::geometry::Manifold;
use crate::methods::MethodKind;
use crate::objective::BuiltinObjective;
use crate::oracles::NoiseModel;
use crate::schedules::StepSchedule;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Sphere { ambient_dim: usize },
    Torus { major_radius: f64, minor_radius: f64 },
    EntropySimplex { coords: usize },
    LogBarrier { coords: usize },
    Euclidean { coords: usize },
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<Manifold, ConfigError> {
        let m = match self {
            ManifoldSpec::Sphere { ambient_dim } => Manifold::sphere(*ambient_dim),
            ManifoldSpec::Torus {
                major_radius,
                minor_radius,
            } => Manifold::torus(*major_radius, *minor_radius),
            ManifoldSpec::EntropySimplex { coords } => Manifold::entropy_simplex(*coords),
            ManifoldSpec::LogBarrier { coords } => Manifold::log_barrier(*coords),
            ManifoldSpec::Euclidean { coords } => Manifold::euclidean(*coords),
        };
        m.map_err(|e| ConfigError::Invalid {
            field: "manifold",
            message: e.to_string(),
        })
    }
}

/// Where a trial starts: within `radius` of an anchor, either a labeled
/// catalog point or explicit coordinates. Multiple anchors are assigned
/// round-robin over the trial index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub anchors: Vec<AnchorSpec>,
    pub radius: f64,
}

// untagged: `{"label": ...}` or `{"coords": [...]}`; a key matching neither
// variant fails both and surfaces as a parse error
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorSpec {
    Label { label: String },
    Coords { coords: Vec<f64> },
}

/// Terminal classification radii and the gradient gate a trial must pass to
/// count as converged.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    #[serde(default = "default_radius")]
    pub r_min: f64,
    #[serde(default = "default_radius")]
    pub r_saddle: f64,
    #[serde(default = "default_grad_tol")]
    pub terminal_grad_tol: f64,
}

fn default_radius() -> f64 {
    1e-2
}

fn default_grad_tol() -> f64 {
    1e-3
}

impl Default for ClassifySpec {
    fn default() -> Self {
        ClassifySpec {
            r_min: default_radius(),
            r_saddle: default_radius(),
            terminal_grad_tol: default_grad_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AptSpec {
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_probe_grid")]
    pub probe_grid: usize,
    /// 1-based iterate indices at which to probe; defaults to
    /// 100 * 2^k for k = 0..=6.
    #[serde(default = "default_probe_indices")]
    pub probe_indices: Vec<u64>,
}

fn default_window() -> f64 {
    1.0
}

fn default_probe_grid() -> usize {
    64
}

fn default_probe_indices() -> Vec<u64> {
    (0..=6u32).map(|k| 100 * 2u64.pow(k)).collect()
}

impl Default for AptSpec {
    fn default() -> Self {
        AptSpec {
            window: default_window(),
            probe_grid: default_probe_grid(),
            probe_indices: default_probe_indices(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldSpec,
    pub objective: BuiltinObjective,
    pub method: MethodKind,
    pub schedule: StepSchedule,
    pub noise: NoiseModel,
    pub max_iters: u64,
    pub trials: u64,
    pub master_seed: u64,
    pub init: InitSpec,
    #[serde(default)]
    pub classify: ClassifySpec,
    #[serde(default)]
    pub apt: Option<AptSpec>,
    #[serde(default)]
    pub record_decomposition: bool,
    /// Candidate starts for the critical-point catalog search.
    #[serde(default = "default_catalog_candidates")]
    pub catalog_candidates: usize,
    /// How many trials keep a thinned path for plotting.
    #[serde(default = "default_svg_trajectories")]
    pub svg_trajectories: u64,
}

fn default_catalog_candidates() -> usize {
    64
}

fn default_svg_trajectories() -> u64 {
    8
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.manifold.build()?;
        self.schedule.validate().map_err(|e| ConfigError::Invalid {
            field: "schedule",
            message: e.to_string(),
        })?;
        if self.trials < 1 {
            return Err(ConfigError::Invalid {
                field: "trials",
                message: "need at least one trial".into(),
            });
        }
        if !(self.init.radius >= 0.0) {
            return Err(ConfigError::Invalid {
                field: "init.radius",
                message: "radius must be nonnegative".into(),
            });
        }
        if self.init.anchors.is_empty() {
            return Err(ConfigError::Invalid {
                field: "init.anchors",
                message: "need at least one anchor".into(),
            });
        }
        if !(self.classify.r_saddle > 0.0) || !(self.classify.r_min > 0.0) {
            return Err(ConfigError::Invalid {
                field: "classify",
                message: "classification radii must be positive".into(),
            });
        }
        if let NoiseModel::FiniteSumMinibatch {
            components,
            batch_size,
        } = &self.noise
        {
            if components.is_empty() || *batch_size == 0 {
                return Err(ConfigError::Invalid {
                    field: "noise",
                    message: "minibatch noise needs components and batch_size >= 1".into(),
                });
            }
        }
        Ok(())
    }
}
