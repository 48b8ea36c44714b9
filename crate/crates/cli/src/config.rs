use std::path::Path;

use anyhow::{bail, Context, Result};
use duplex_core::{AnalysisConfig, DurationModel, RewardWeights};
use serde::{Deserialize, Serialize};

/// Everything the subcommands can be tuned with. A config file may set any
/// subset of the fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub analysis: AnalysisConfig,
    pub duration: DurationModel,
    pub weights: RewardWeights,
    pub epsilon: f64,
    /// Candidates per group.
    pub k: usize,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            analysis: AnalysisConfig::default(),
            duration: DurationModel::default(),
            weights: RewardWeights::default(),
            epsilon: 0.2,
            k: 4,
        }
    }
}

impl ToolConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ToolConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Err(msg) = self.analysis.validate() {
            bail!("analysis config: {msg}");
        }
        self.duration.validate()?;
        self.weights.validate()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            bail!("epsilon must be in (0, 1), got {}", self.epsilon);
        }
        if self.k < 2 {
            bail!("k must be at least 2, got {}", self.k);
        }
        Ok(())
    }
}
