use std::fs;
use std::path::{Path, PathBuf};

use quermass_core::{FlowConfig, ShapeSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Flow,
    Analyze,
    Verify,
}

/// One JSON file describing a run. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Dimension of the base sphere; must agree with `flow.n`.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
    /// `(n_lat, n_lon)`; `n_lat` is ignored on S^1.
    #[serde(default = "default_grid")]
    pub grid: (usize, usize),
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_svg: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    2
}

fn default_grid() -> (usize, usize) {
    (64, 128)
}

fn default_out() -> PathBuf {
    PathBuf::from(".")
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            n: 2,
            flow: None,
            shape: None,
            grid: default_grid(),
            output_dir: default_out(),
            emit_svg: false,
            seed: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|msg| CliError::Config { path: path.to_path_buf(), msg })
    }

    /// Parses and validates; the message names the line and column or the
    /// offending field.
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.n == 1 || self.n == 2) {
            return Err(format!("n: expected 1 or 2, got {}", self.n));
        }
        if self.mode != Mode::Verify && self.shape.is_none() {
            return Err("shape: required for flow and analyze runs".into());
        }
        if let Some(shape) = &self.shape {
            shape.validate().map_err(|e| format!("shape: {e}"))?;
        }
        match (&self.mode, &self.flow) {
            (Mode::Flow, None) => return Err("flow: required when mode is \"flow\"".into()),
            (_, Some(f)) => {
                f.validate().map_err(|e| format!("flow: {e}"))?;
                if f.n != self.n {
                    return Err(format!("flow.n = {} disagrees with n = {}", f.n, self.n));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
