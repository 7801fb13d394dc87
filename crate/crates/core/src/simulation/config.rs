use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::Estimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Bias,
    Qmse,
    Consistency,
}

/// One distribution family with fixed parameters, as written in a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Sweeps one parameter of every spec over a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub param: String,
    pub values: Vec<f64>,
}

fn default_n() -> usize {
    10
}

fn default_nsim() -> usize {
    100_000
}

fn default_estimators() -> Vec<Estimator> {
    Estimator::ALL.to_vec()
}

/// A Monte-Carlo experiment, usually read from JSON.
///
/// ```
/// let cfg: mwvar::simulation::ExperimentConfig = serde_json::from_str(r#"{
///     "experiment": "qmse",
///     "specs": [{"name": "normal", "params": {"sd1": 1, "sd2": 2}}],
///     "grid": {"param": "theta", "values": [0.5, 0.7, 0.9]},
///     "nsim": 1000, "seed": 42, "estimators": ["N", "DL", "PM"]
/// }"#).unwrap();
/// assert_eq!(cfg.cells().unwrap().len(), 3);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub specs: Vec<SpecConfig>,
    #[serde(default = "default_n")]
    pub n1: usize,
    #[serde(default = "default_n")]
    pub n2: usize,
    #[serde(default = "default_nsim")]
    pub nsim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default)]
    pub grid: Option<Grid>,
    /// Total sample sizes `N` for the consistency experiment (`n1 = n2 = N/2`).
    #[serde(default)]
    pub n_sequence: Vec<usize>,
}

/// A fully resolved simulation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub spec: DistributionSpec,
    pub n1: usize,
    pub n2: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.nsim == 0 {
            return bad("nsim must be at least 1");
        }
        if self.specs.is_empty() {
            return bad("at least one spec is required");
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required");
        }
        if let Some(grid) = &self.grid {
            if grid.values.is_empty() {
                return bad("grid values must not be empty");
            }
        }
        match self.experiment {
            Experiment::Consistency => {
                if self.n_sequence.is_empty() {
                    return bad("consistency needs a non-empty n_sequence");
                }
                if self.n_sequence.iter().any(|&n| n < 4 || n % 2 == 1) {
                    return bad("n_sequence entries must be even and at least 4");
                }
            }
            _ => {
                if self.n1 < 2 || self.n2 < 2 {
                    return bad("n1 and n2 must be at least 2");
                }
            }
        }
        Ok(())
    }

    /// The distribution specs after grid expansion, in config order.
    pub fn resolved_specs(&self) -> Result<Vec<DistributionSpec>> {
        let mut out = Vec::new();
        for spec in &self.specs {
            match &self.grid {
                None => out.push(DistributionSpec::from_config(&spec.name, &spec.params)?),
                Some(grid) => {
                    for &v in &grid.values {
                        let mut params = spec.params.clone();
                        params.insert(grid.param.clone(), v);
                        out.push(DistributionSpec::from_config(&spec.name, &params)?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Every (spec, n1, n2) cell of the experiment, in output order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        self.validate()?;
        let specs = self.resolved_specs()?;
        Ok(match self.experiment {
            Experiment::Consistency => specs
                .iter()
                .flat_map(|spec| {
                    self.n_sequence.iter().map(move |&n| Cell { spec: spec.clone(), n1: n / 2, n2: n / 2 })
                })
                .collect(),
            _ => specs.into_iter().map(|spec| Cell { spec, n1: self.n1, n2: self.n2 }).collect(),
        })
    }
}
