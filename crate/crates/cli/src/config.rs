//! Experiment configuration: a JSON document that fully determines a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use anisotm_core::error::{Error, Result};
use anisotm_core::gauge::{Gauge, GaugeSpec};
use anisotm_core::{Inequality, TmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Verify,
    Sweep,
    Sup,
    Mu,
    Symcheck,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Verify => "verify",
            CommandKind::Sweep => "sweep",
            CommandKind::Sup => "sup",
            CommandKind::Mu => "mu",
            CommandKind::Symcheck => "symcheck",
        }
    }
}

fn default_lambda_fraction() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}

/// Inequality parameters as written in configs. `lambda` is given as a
/// fraction of the gauge's critical constant so configs stay
/// gauge-portable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub dim: usize,
    pub q: f64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_lambda_fraction")]
    pub lambda_fraction: f64,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default = "two")]
    pub k: f64,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
}

impl ParamSpec {
    pub fn build(&self, g: &Gauge) -> Result<TmParams> {
        let n = self.dim as f64;
        if !(self.beta < n) {
            return Err(Error::Parse(format!(
                "\u{3b2} must be < N (got \u{3b2} = {}, N = {})",
                self.beta, self.dim
            )));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::Parse(format!(
                "\u{3b2} must be nonnegative (got {})",
                self.beta
            )));
        }
        if !(self.lambda_fraction > 0.0) {
            return Err(Error::Parse(format!(
                "lambda_fraction must be positive (got {})",
                self.lambda_fraction
            )));
        }
        let lambda = self.lambda_fraction * g.constants()?.lambda;
        let params = TmParams::new(self.dim, self.q, self.beta)?
            .with_p(self.p.unwrap_or(self.q))
            .with_lambda(lambda)
            .with_d(self.d)
            .with_k(self.k)
            .with_ab(self.a.unwrap_or(n), self.b.unwrap_or(n));
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    /// Verify target: "gauge", "profiles", "rearrange"; all when absent.
    #[serde(default)]
    pub module: Option<String>,
    pub gauge: GaugeSpec,
    pub params: ParamSpec,
    #[serde(default)]
    pub inequality: Option<Inequality>,
    #[serde(default)]
    pub n_list: Option<Vec<f64>>,
    #[serde(default)]
    pub h_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_fractions: Option<Vec<f64>>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub family_n_max: Option<f64>,
    #[serde(default)]
    pub grid_side: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("config: {e}")))?;
        if let Some(list) = &cfg.n_list {
            if list.is_empty() || list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Parse("n_list must be increasing and nonempty".into()));
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
