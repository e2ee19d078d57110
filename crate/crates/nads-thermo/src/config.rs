//! Experiment configuration: JSON documents driving the runner and the CLI.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{NadsError, Result};

/// Grid sizes for the space a system key builds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpaceConfig {
    /// Points on interval/circle grids.
    #[serde(default = "default_size")]
    pub size: usize,
    /// Word length for symbolic spaces.
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_size() -> usize {
    256
}

fn default_depth() -> usize {
    8
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            size: default_size(),
            depth: default_depth(),
        }
    }
}

/// Dictionary closure and candidate parameters for duality runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityConfig {
    #[serde(default = "default_cob_steps")]
    pub coboundary_steps: usize,
    #[serde(default = "default_scaling_max")]
    pub scaling_max: i64,
    /// Extra Dirac candidates by point index.
    #[serde(default)]
    pub dirac_candidates: Vec<usize>,
}

fn default_cob_steps() -> usize {
    2
}

fn default_scaling_max() -> i64 {
    64
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig {
            coboundary_steps: default_cob_steps(),
            scaling_max: default_scaling_max(),
            dirac_candidates: Vec::new(),
        }
    }
}

/// One experiment: a system, potentials, an `(n, scale)` grid and a mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Catalog key, or `custom:PATH` pointing at a JSON system document.
    pub system: String,
    #[serde(default)]
    pub space: SpaceConfig,
    /// Potential specs; `zero` is used when empty.
    #[serde(default)]
    pub potentials: Vec<String>,
    pub schedule: Vec<usize>,
    pub scales: Vec<f64>,
    /// "top", "mis" or "both".
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub duality: Option<DualityConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Fixes every seeded choice; substituted into `lipschitz-random:auto,L`
    /// potential specs.
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> String {
    "top".into()
}

impl ExperimentConfig {
    pub fn from_json(doc: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(doc)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() || self.schedule[0] < 1 {
            return Err(NadsError::InvalidConfig(
                "schedule must be a nonempty ascending list with n >= 1".into(),
            ));
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NadsError::InvalidConfig("schedule must be ascending".into()));
        }
        if self.scales.is_empty()
            || self.scales.iter().any(|&s| !(s > 0.0))
            || self.scales.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(NadsError::InvalidConfig(
                "scales must be a descending list of positive reals".into(),
            ));
        }
        if !matches!(self.mode.as_str(), "top" | "mis" | "both") {
            return Err(NadsError::InvalidConfig(format!(
                "mode must be top, mis or both, got {}",
                self.mode
            )));
        }
        Ok(())
    }

    /// Potential specs with the `auto` seed placeholder resolved.
    pub fn resolved_potentials(&self) -> Vec<String> {
        let specs = if self.potentials.is_empty() {
            vec!["zero".to_string()]
        } else {
            self.potentials.clone()
        };
        specs
            .into_iter()
            .map(|s| s.replace("lipschitz-random:auto,", &format!("lipschitz-random:{},", self.seed)))
            .collect()
    }
}
