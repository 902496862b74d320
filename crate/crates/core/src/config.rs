//! Run configuration shared by every subcommand.
//!
//! A config file is flat TOML with four tables. Seeds have no defaults in
//! files: a file that omits one is rejected.
//!
//! ```toml
//! output_dir = "out"
//!
//! [quadrature]
//! nodes = 4096
//! optimizer_nodes = 256
//! seed = 0
//!
//! [optimizer]
//! starts = 32
//! budget = 2000
//! seed = 0
//! kind = "nelder-mead"
//!
//! [tolerances]
//! index_tol = 1e-9
//! symmetry_tol = 1e-12
//! inequality_slack = 1e-9
//! threshold_rel = 1e-12
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::delta::{EstimateSettings, OptimizerKind};
use crate::error::{Error, Result};
use crate::sphere::RuleMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Target node count for stand-alone `psi` evaluations and sweeps.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Target node count inside the optimizer loop.
    #[serde(default = "default_optimizer_nodes")]
    pub optimizer_nodes: usize,
    #[serde(default)]
    pub method: Option<RuleMethod>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    pub seed: u64,
    #[serde(default = "default_kind")]
    pub kind: OptimizerKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_index_tol")]
    pub index_tol: f64,
    #[serde(default = "default_symmetry_tol")]
    pub symmetry_tol: f64,
    /// Slack allowed on the inequalities checked by `check`.
    #[serde(default = "default_slack")]
    pub inequality_slack: f64,
    /// Relative feasibility threshold on `psi_p` in the optimizer.
    #[serde(default = "default_threshold")]
    pub threshold_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub quadrature: QuadratureConfig,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_nodes() -> usize {
    4096
}
fn default_optimizer_nodes() -> usize {
    256
}
fn default_starts() -> usize {
    32
}
fn default_budget() -> usize {
    2000
}
fn default_kind() -> OptimizerKind {
    OptimizerKind::NelderMead
}
fn default_index_tol() -> f64 {
    crate::strata::INDEX_TOL
}
fn default_symmetry_tol() -> f64 {
    crate::form::SYMMETRY_TOL
}
fn default_slack() -> f64 {
    1e-9
}
fn default_threshold() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            index_tol: default_index_tol(),
            symmetry_tol: default_symmetry_tol(),
            inequality_slack: default_slack(),
            threshold_rel: default_threshold(),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            quadrature: QuadratureConfig {
                nodes: default_nodes(),
                optimizer_nodes: default_optimizer_nodes(),
                method: None,
                seed: 0,
            },
            optimizer: OptimizerConfig {
                starts: default_starts(),
                budget: default_budget(),
                seed: 0,
                kind: default_kind(),
            },
            tolerances: Tolerances::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("index_tol", t.index_tol),
            ("symmetry_tol", t.symmetry_tol),
            ("inequality_slack", t.inequality_slack),
            ("threshold_rel", t.threshold_rel),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerances.{name} = {v} must be positive and finite")));
            }
        }
        if self.quadrature.nodes == 0 || self.quadrature.optimizer_nodes == 0 {
            return Err(Error::Config("quadrature node counts must be positive".into()));
        }
        if self.optimizer.starts == 0 || self.optimizer.budget == 0 {
            return Err(Error::Config("optimizer.starts and optimizer.budget must be positive".into()));
        }
        Ok(())
    }

    pub fn estimate_settings(&self) -> EstimateSettings {
        EstimateSettings {
            starts: self.optimizer.starts,
            budget: self.optimizer.budget,
            seed: self.optimizer.seed,
            optimizer: self.optimizer.kind,
        }
    }
}
