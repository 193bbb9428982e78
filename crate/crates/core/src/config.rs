use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::paths::SeedSpec;
use crate::psi::IntegrandSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Exact,
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One experiment. Every field has a default, so `{}` is the canonical
/// ψ = 1, T = 1, 10⁵-path exact run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_psi")]
    pub psi: IntegrandSpec,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub antithetic: bool,
    #[serde(default = "default_p_values")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_psi() -> IntegrandSpec {
    IntegrandSpec::constant(1.0)
}
fn default_horizon() -> f64 {
    1.0
}
fn default_steps() -> usize {
    16
}
fn default_n_paths() -> usize {
    100_000
}
fn default_p_values() -> Vec<f64> {
    vec![2.0]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("config line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("field `horizon`: must be positive, got {}", self.horizon));
        }
        if self.steps == 0 {
            return bad("field `steps`: must be at least 1".into());
        }
        if self.n_paths == 0 {
            return bad("field `n_paths`: must be at least 1".into());
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return bad(format!("field `n_paths`: antithetic runs need an even count, got {}", self.n_paths));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return bad(format!("field `p_values`: moments need p > 0, got {p}"));
        }
        self.psi.validate()
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.horizon, self.steps)
    }

    pub fn seed_spec(&self) -> SeedSpec {
        SeedSpec::new(self.seed)
    }
}
