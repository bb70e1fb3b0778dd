use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundParams, DeltaRule};
use crate::error::{Error, Result};
use crate::rgg::{RadiusRule, WeightSpec, XiFactor};
use crate::sampling::DensitySpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingModel {
    #[default]
    Binomial,
    Poisson,
}

/// Everything a sweep needs. Stored as TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub alpha: f64,
    /// Box parameter `A` for the fine squares.
    #[serde(rename = "A", alias = "a")]
    pub a: f64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub process: SamplingModel,
    #[serde(default)]
    pub delta_rule: DeltaRule,
    pub radius_rule: RadiusRule,
    #[serde(default = "DensitySpec::uniform")]
    pub density: DensitySpec,
    #[serde(default = "default_xi")]
    pub weights: XiFactor,
}

fn default_workers() -> usize {
    1
}

fn default_xi() -> XiFactor {
    XiFactor::Constant { value: 1.0 }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values is empty".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("every n must be >= 2, got {n}")));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Config(format!("A must be positive, got {}", self.a)));
        }
        self.density.validate()?;
        self.weight_spec()?;
        Ok(())
    }

    pub fn weight_spec(&self) -> Result<WeightSpec> {
        let ws = WeightSpec {
            alpha: self.alpha,
            xi: self.weights.clone(),
        };
        ws.validate()?;
        Ok(ws)
    }

    pub fn bound_params(&self) -> Result<BoundParams> {
        let ws = self.weight_spec()?;
        let p = BoundParams {
            eps1: self.density.eps1,
            eps2: self.density.eps2,
            xi_min: ws.xi_min(),
            xi_max: ws.xi_max(),
            alpha: self.alpha,
            delta_rule: self.delta_rule,
        };
        p.validate()?;
        Ok(p)
    }

    /// Distinct `n` values in increasing order.
    pub fn sorted_n_values(&self) -> Vec<usize> {
        let mut ns = self.n_values.clone();
        ns.sort_unstable();
        ns.dedup();
        ns
    }
}
