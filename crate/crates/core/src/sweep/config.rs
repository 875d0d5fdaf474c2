use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Family, InitialDatum};

/// Viscosity list, either explicit or log-spaced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuSpec {
    List(Vec<f64>),
    LogSpaced { min: f64, max: f64, count: usize },
}

impl NuSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            NuSpec::List(v) => v.clone(),
            NuSpec::LogSpaced { min, max, count } => log_spaced(*min, *max, *count),
        }
    }
}

impl Default for NuSpec {
    fn default() -> Self {
        NuSpec::List(Vec::new())
    }
}

/// `count` points from `min` to `max`, equally spaced in `log`.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// A batch of `(model parameters, nu)` runs. See the README for the schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: Family,
    #[serde(default)]
    pub nu: NuSpec,
    #[serde(default = "one_k")]
    pub k: Vec<i64>,
    /// Spiral exponents.
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Dissipation orders for shear models.
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub profile: Option<String>,
    /// Overrides the profile's known vanishing order.
    #[serde(default)]
    pub n0: Option<u32>,
    /// Kolmogorov aspect ratio.
    #[serde(default)]
    pub l: Option<f64>,
    /// Hermite velocity dimension.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub datum: Option<InitialDatum>,
    /// Torus modes `M`, radial points `N`, or Hermite degree.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Runs stop by `t_end_factor * predicted time-scale`.
    #[serde(default = "twenty")]
    pub t_end_factor: f64,
    #[serde(default)]
    pub theta: Option<f64>,
    /// Upper bound on samples kept per trace.
    #[serde(default = "max_samples")]
    pub max_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    pub output: PathBuf,
}

fn one_k() -> Vec<i64> {
    vec![1]
}

fn twenty() -> f64 {
    20.0
}

fn max_samples() -> usize {
    4000
}

impl SweepConfig {
    pub fn new(family: Family, output: impl Into<PathBuf>) -> Self {
        Self {
            family,
            nu: NuSpec::default(),
            k: one_k(),
            alpha: Vec::new(),
            gamma: Vec::new(),
            profile: None,
            n0: None,
            l: None,
            dim: None,
            datum: None,
            resolution: None,
            dt: None,
            t_end_factor: twenty(),
            theta: None,
            max_samples: max_samples(),
            seed: 0,
            workers: None,
            output: output.into(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_reader(std::fs::File::open(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for nu in self.nu.values() {
            if !(nu > 0.0 && nu < 1.0) {
                return Err(Error::InvalidParameter(format!("viscosity {nu} outside (0, 1)")));
            }
        }
        if let NuSpec::LogSpaced { min, max, .. } = self.nu {
            if !(min <= max) {
                return Err(Error::InvalidParameter("nu range has min > max".into()));
            }
        }
        if self.k.is_empty() {
            return Err(Error::InvalidParameter("k list is empty".into()));
        }
        if !(self.t_end_factor > 0.0) {
            return Err(Error::InvalidParameter("t_end_factor must be positive".into()));
        }
        if let Some(theta) = self.theta {
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")));
            }
        }
        if self.max_samples < 3 {
            return Err(Error::InvalidParameter("max_samples must be at least 3".into()));
        }
        Ok(())
    }
}
