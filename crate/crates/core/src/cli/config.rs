use crate::data::DataFamily;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, TimeLadder};
use crate::hmflow::SolverConfig;
use crate::verify::Profile;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_picard_tol() -> f64 {
    1e-10
}
fn default_max_iters() -> usize {
    60
}
fn default_constraint_tol() -> f64 {
    1e-6
}

/// Iteration controls shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_constraint_tol")]
    pub constraint_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            picard_tol: default_picard_tol(),
            max_iters: default_max_iters(),
            constraint_tol: default_constraint_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    Hmf,
    Lc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub flow: Flow,
    pub amplitudes: Vec<f64>,
}

/// One experiment, read from a single JSON document. Unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub ladder: Option<TimeLadder>,
    /// Sphere-valued map (or director) family.
    #[serde(default)]
    pub data: Option<DataFamily>,
    /// Velocity family for the coupled flow.
    #[serde(default)]
    pub velocity: Option<DataFamily>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Radius for BMO-type functionals; defaults to `min(L/4, √T)`.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepSettings>,
    /// Ladder slices written as snapshots after a solve or extension.
    #[serde(default)]
    pub snapshots: Vec<usize>,
    #[serde(default)]
    pub profile: Profile,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let g = self.grid.ok_or_else(|| Error::Config("missing `grid`".into()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn ladder(&self) -> Result<TimeLadder> {
        let l = self.ladder.ok_or_else(|| Error::Config("missing `ladder`".into()))?;
        l.validate()?;
        Ok(l)
    }

    pub fn data(&self) -> Result<&DataFamily> {
        self.data.as_ref().ok_or_else(|| Error::Config("missing `data`".into()))
    }

    pub fn velocity(&self) -> Result<&DataFamily> {
        self.velocity
            .as_ref()
            .ok_or_else(|| Error::Config("missing `velocity`".into()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            grid: self.grid()?,
            ladder: self.ladder()?,
            picard_tol: self.solver.picard_tol,
            max_iters: self.solver.max_iters,
            constraint_tol: self.solver.constraint_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The BMO radius, defaulting to the largest one the ladder supports.
    pub fn radius(&self) -> Result<f64> {
        let g = self.grid()?;
        let cap = g.period / 4.0;
        Ok(match (self.radius, self.ladder) {
            (Some(r), _) => r,
            (None, Some(l)) => cap.min(l.t_final.sqrt()),
            (None, None) => cap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"seed": 1, "colour": "red"}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"data": {"family": "hedgehog", "alpha": 0.1, "beta": 2}}"#
        )
        .is_err());
        let c = ExperimentConfig::from_json(r#"{"data": {"family": "hedgehog", "alpha": 0.1}}"#).unwrap();
        assert_eq!(c.data, Some(DataFamily::Hedgehog { alpha: 0.1 }));
    }
}
