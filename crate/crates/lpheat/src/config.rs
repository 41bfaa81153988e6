//! Experiment configuration: TOML sections with defaults, validated before
//! any numerics run.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemigroupConfig {
    pub kind: String, // classical | hermite | laguerre
    pub dim: usize,
    pub beta: f64,
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        SemigroupConfig {
            kind: "hermite".into(),
            dim: 1,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub points_per_unit: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lo: -6.0,
            hi: 6.0,
            points_per_unit: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GFunctionConfig {
    pub alpha: f64,
    pub q: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub panels: usize,
}

impl Default for GFunctionConfig {
    fn default() -> Self {
        GFunctionConfig {
            alpha: 1.0,
            q: 2.0,
            t_min: 1e-4,
            t_max: 50.0,
            panels: 48,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: String, // real | lp | linf
    pub dim: usize,
    pub p: f64,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            kind: "real".into(),
            dim: 1,
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// primary relative tolerance of the experiment; each experiment
    /// documents its default
    pub rel: Option<f64>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { rel: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub out_dir: String,
    pub trials: usize,
    pub semigroup: SemigroupConfig,
    pub grid: GridConfig,
    pub gfunction: GFunctionConfig,
    pub space: SpaceConfig,
    pub tolerances: ToleranceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            seed: 7,
            out_dir: "out".into(),
            trials: 100,
            semigroup: SemigroupConfig::default(),
            grid: GridConfig::default(),
            gfunction: GFunctionConfig::default(),
            space: SpaceConfig::default(),
            tolerances: ToleranceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::config("config", format!("parse error: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.semigroup.kind.as_str() {
            "classical" | "hermite" | "laguerre" => {}
            other => {
                return Err(Error::config(
                    "semigroup.kind",
                    format!("unknown semigroup '{other}'"),
                ))
            }
        }
        if self.semigroup.dim == 0 {
            return Err(Error::config("semigroup.dim", "dimension must be positive"));
        }
        if self.semigroup.kind == "laguerre" && self.semigroup.beta <= -0.5 {
            return Err(Error::config("semigroup.beta", "requires beta > -1/2"));
        }
        if !(self.grid.hi > self.grid.lo) {
            return Err(Error::config("grid.hi", "grid window must satisfy hi > lo"));
        }
        if self.grid.points_per_unit < 8 {
            return Err(Error::config(
                "grid.points_per_unit",
                "resolution must be at least 8 points per unit length",
            ));
        }
        if !(self.gfunction.alpha > 0.0) {
            return Err(Error::config("gfunction.alpha", "alpha must be positive"));
        }
        if !(self.gfunction.q > 1.0) {
            return Err(Error::config("gfunction.q", "q must exceed 1"));
        }
        if !(self.gfunction.t_min > 0.0) || !(self.gfunction.t_max > self.gfunction.t_min) {
            return Err(Error::config(
                "gfunction.t_min",
                "time window must satisfy 0 < t_min < t_max",
            ));
        }
        if self.gfunction.panels == 0 {
            return Err(Error::config("gfunction.panels", "need at least one panel"));
        }
        match self.space.kind.as_str() {
            "real" | "lp" | "linf" => {}
            other => {
                return Err(Error::config("space.kind", format!("unknown space '{other}'")))
            }
        }
        if self.space.dim == 0 {
            return Err(Error::config("space.dim", "dimension must be positive"));
        }
        if self.space.kind == "lp" && !(self.space.p >= 1.0) {
            return Err(Error::config("space.p", "requires p >= 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "need at least one trial"));
        }
        if let Some(rel) = self.tolerances.rel {
            if !(rel > 0.0) {
                return Err(Error::config("tolerances.rel", "tolerance must be positive"));
            }
        }
        Ok(())
    }
}
