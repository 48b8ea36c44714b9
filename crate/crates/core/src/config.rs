use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Thresholds used by the structural, event and error layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Gaps strictly longer than this are delayed transitions.
    pub delayed_gap_ms: u64,
    /// Overlaps shorter than this are ignored by the event layer.
    pub min_overlap_ms: u64,
    pub backchannel_max_ms: u64,
    pub backchannel_max_words: usize,
    /// Post-overlap speech needed to count as "continuing".
    pub continuation_window_ms: u64,
    pub ceding_window_ms: u64,
    pub backchannel_lexicon: BTreeSet<String>,
}

pub const DEFAULT_BACKCHANNEL_LEXICON: [&str; 10] = [
    "uh-huh", "mm-hmm", "right", "okay", "ok", "yeah", "yes", "i see", "got it", "sure",
];

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            delayed_gap_ms: 3000,
            min_overlap_ms: 200,
            backchannel_max_ms: 1000,
            backchannel_max_words: 3,
            continuation_window_ms: 500,
            ceding_window_ms: 1000,
            backchannel_lexicon: DEFAULT_BACKCHANNEL_LEXICON.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), String> {
        let durations = [
            ("delayed_gap_ms", self.delayed_gap_ms),
            ("min_overlap_ms", self.min_overlap_ms),
            ("backchannel_max_ms", self.backchannel_max_ms),
            ("continuation_window_ms", self.continuation_window_ms),
            ("ceding_window_ms", self.ceding_window_ms),
        ];
        if let Some((name, _)) = durations.iter().find(|(_, v)| *v == 0) {
            return Err(format!("{name} must be positive"));
        }
        if self.backchannel_max_words == 0 {
            return Err("backchannel_max_words must be positive".into());
        }
        if self.backchannel_lexicon.is_empty() {
            return Err("backchannel_lexicon must not be empty".into());
        }
        Ok(())
    }

    /// How soon a speaker must resume to keep a turn across a silence the
    /// other speaker started talking into.
    pub fn resume_window_ms(&self) -> u64 {
        2 * self.continuation_window_ms
    }
}
