//! Flat experiment configuration. Precedence, lowest first: built-in suite
//! defaults, the `--config` file, command-line flags.

use std::path::{Path, PathBuf};

use levylab::measure::FunctionSpec;
use levylab::suites::{Suite, SuiteConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    Verify,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Gamma process, series representation.
    Gamma,
    /// α-stable process with scale c.
    Stable,
    /// Exponentially tilted stable with scale k^α/α and tilt 1.
    TiltedStable,
    /// Conic Poisson-Dirichlet CPD(θ) sequence.
    Cpd,
    /// PD(θ) sequence.
    Pd,
    /// Two-parameter PD(α, θ) sequence.
    Pd2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc_tail: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panel: Option<Vec<FunctionSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Values set in `top` win.
    pub fn overlay(mut self, top: &ExperimentConfig) -> Self {
        overlay!(self, top; command, suite, model, theta, alpha, c, k, lambda, n, n_terms, seed,
            trunc_atoms, trunc_tail, alpha_grid, z_grid, panel, out, format);
        if !top.inputs.is_empty() {
            self.inputs = top.inputs.clone();
        }
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("levylab-out"))
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed(),
            theta: self.theta,
            alpha: self.alpha,
            c: self.c,
            k: self.k,
            lambda: self.lambda,
            n: self.n,
            trunc_atoms: self.trunc_atoms,
            trunc_tail: self.trunc_tail,
            alpha_grid: self.alpha_grid.clone(),
            z_grid: self.z_grid.clone(),
            panel: self.panel.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"seed": 1, "sede": 2}"#);
        assert!(err.is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: ExperimentConfig = serde_json::from_str(r#"{"seed": 1, "theta": 2.0, "n": 10}"#).unwrap();
        let flags = ExperimentConfig { theta: Some(3.0), ..Default::default() };
        let merged = file.overlay(&flags);
        assert_eq!(merged.theta, Some(3.0));
        assert_eq!(merged.n, Some(10));
        assert_eq!(merged.seed(), 1);
    }

    #[test]
    fn suite_names_parse_in_config() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"suite": "two-param-mk", "model": "tilted-stable"}"#).unwrap();
        assert_eq!(cfg.suite, Some(Suite::TwoParamMk));
        assert_eq!(cfg.model, Some(Model::TiltedStable));
    }
}
