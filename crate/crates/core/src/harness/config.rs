use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{start_registry, step_rule_registry};

/// Where a run writes its artifacts. Unset paths are not written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Outputs {
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
}

impl Outputs {
    /// `trace.csv`, `summary.json` and `convergence.svg` inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            csv_path: Some(dir.join("trace.csv")),
            json_path: Some(dir.join("summary.json")),
            svg_path: Some(dir.join("convergence.svg")),
        }
    }
}

/// A batch of solver trials on generated (or ingested) problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Explicit singular values, nonincreasing. Overrides `condNumber`.
    pub spectrum: Option<Vec<f64>>,
    pub cond_number: Option<f64>,
    pub sigma_max: f64,
    pub trials: usize,
    pub seed: u64,
    pub start_strategy: String,
    pub radius: f64,
    pub step_policy: String,
    pub eta: Option<f64>,
    pub grad_tol: Option<f64>,
    pub max_iters: usize,
    /// Record distances and envelopes against the known optimum.
    pub oracle: bool,
    /// Run a certificate sweep on every trial's problem.
    pub certify: bool,
    pub cert_samples: usize,
    pub cert_radius: f64,
    pub outputs: Outputs,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2,
            spectrum: None,
            cond_number: None,
            sigma_max: 1.0,
            trials: 1,
            seed: 0,
            start_strategy: "distance".into(),
            radius: PI / 2.0,
            step_policy: "certified".into(),
            eta: None,
            grad_tol: None,
            max_iters: 100_000,
            oracle: true,
            certify: false,
            cert_samples: 100,
            cert_radius: 0.95 * PI,
            outputs: Outputs::default(),
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// The singular values every generated problem gets.
    pub fn singular_values(&self) -> Vec<f64> {
        if let Some(s) = &self.spectrum {
            return s.clone();
        }
        let cond = self.cond_number.unwrap_or(1.0);
        let n = self.n;
        (0..n)
            .map(|k| {
                if n == 1 {
                    self.sigma_max
                } else {
                    self.sigma_max * cond.powf(-(k as f64) / (n - 1) as f64)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(bad("n must be at least 1"));
        }
        if self.trials == 0 {
            return Err(bad("trials must be at least 1"));
        }
        match &self.spectrum {
            Some(s) => {
                if s.len() != self.n {
                    return Err(bad(format!(
                        "spectrum has {} entries but n = {}",
                        s.len(),
                        self.n
                    )));
                }
                if s.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(bad("spectrum entries must be finite and nonnegative"));
                }
                if s.windows(2).any(|w| w[0] < w[1]) {
                    return Err(bad("spectrum must be nonincreasing"));
                }
                if s.iter().all(|x| *x == 0.0) {
                    return Err(bad("spectrum must not be all zero"));
                }
            }
            None => {
                if let Some(c) = self.cond_number {
                    if !(c >= 1.0 && c.is_finite()) {
                        return Err(bad("condNumber must be finite and at least 1"));
                    }
                }
                if !(self.sigma_max > 0.0 && self.sigma_max.is_finite()) {
                    return Err(bad("sigmaMax must be positive and finite"));
                }
            }
        }
        if !(self.radius >= 0.0 && self.radius < PI) {
            return Err(bad("radius must lie in [0, π)"));
        }
        if !(self.cert_radius >= 0.0 && self.cert_radius < PI) {
            return Err(bad("certRadius must lie in [0, π)"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(bad("eta must be positive and finite"));
            }
        }
        if let Some(tol) = self.grad_tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(bad("gradTol must be nonnegative and finite"));
            }
        }
        let steps = step_rule_registry();
        let rule = steps.get(&self.step_policy)?;
        if rule.needs_oracle() && !self.oracle {
            return Err(bad(format!(
                "stepPolicy `{}` needs oracle tracking",
                self.step_policy
            )));
        }
        if self.step_policy == "fixed" && self.eta.is_none() {
            return Err(bad("stepPolicy `fixed` needs eta"));
        }
        start_registry().get(&self.start_strategy)?;
        Ok(())
    }
}
