//! Run configuration: command-line flags override a JSON config file, which
//! overrides built-in defaults.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Keys accepted in a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub restarts: Option<usize>,
    pub iters: Option<usize>,
    pub step_rule: Option<ultragw::gw::StepRule>,
    pub hitrun_steps: Option<usize>,
    pub tol_stationarity: Option<f64>,
    pub classical: Option<bool>,
    pub k: Option<usize>,
    pub samples_per_block: Option<usize>,
    pub subsample: Option<usize>,
    pub t: Option<f64>,
    pub dim: Option<usize>,
    pub which: Option<String>,
    pub max_n: Option<usize>,
    pub unit_edges: Option<bool>,
    pub measure: Option<ultragw::phylo::TipMeasure>,
    pub skip_invalid: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// `flag`, else the file value, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// A boolean switch set on the command line, in the file, or neither.
pub fn switch(flag: bool, file: Option<bool>) -> bool {
    flag || file.unwrap_or(false)
}
