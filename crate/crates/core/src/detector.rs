//! Failure taxonomy over events and structure, and the dual-axis verdict.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::config::AnalysisConfig;
use crate::error::DetectorError;
use crate::events::{EventKind, InteractionEvent};
use crate::structure::StructuralDecomposition;
use crate::timeline::{DialogueTimeline, Interval, Role, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorType {
    InappropriateBargeIn,
    OverlyDeferentialCeding,
    DelayedTurnTransition,
    IgnoredInterruption,
    ContextualIncoherence,
    InterruptionAmnesia,
}

impl ErrorType {
    pub const ALL: [ErrorType; 6] = [
        ErrorType::InappropriateBargeIn,
        ErrorType::OverlyDeferentialCeding,
        ErrorType::DelayedTurnTransition,
        ErrorType::IgnoredInterruption,
        ErrorType::ContextualIncoherence,
        ErrorType::InterruptionAmnesia,
    ];

    /// Dataset label spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::InappropriateBargeIn => "Inappropriate_Barge_in",
            ErrorType::OverlyDeferentialCeding => "Overly_Deferential_Ceding",
            ErrorType::DelayedTurnTransition => "Delayed_Turn_Transition",
            ErrorType::IgnoredInterruption => "Ignored_Interruption",
            ErrorType::ContextualIncoherence => "Contextual_Incoherence",
            ErrorType::InterruptionAmnesia => "Contextual_Incoherence_After_Interruption",
        }
    }

    /// Accepts the dataset spellings (case-insensitive) plus a few aliases.
    pub fn parse(label: &str) -> Result<ErrorType, DetectorError> {
        let l = label.trim().to_ascii_lowercase();
        let found = match l.as_str() {
            "contextual_amnesia_after_interruption" | "interruption_amnesia" => Some(ErrorType::InterruptionAmnesia),
            _ => ErrorType::ALL
                .into_iter()
                .find(|e| e.as_str().to_ascii_lowercase() == l),
        };
        found.ok_or_else(|| DetectorError::UnknownErrorType(label.to_string()))
    }

    pub fn coarse_class(self) -> CoarseClass {
        match self {
            ErrorType::InappropriateBargeIn | ErrorType::OverlyDeferentialCeding => CoarseClass::QuickE,
            ErrorType::DelayedTurnTransition | ErrorType::IgnoredInterruption => CoarseClass::SlowE,
            ErrorType::ContextualIncoherence | ErrorType::InterruptionAmnesia => CoarseClass::SE,
        }
    }

    pub fn axis(self) -> Axis {
        match self.coarse_class() {
            CoarseClass::SE => Axis::Semantic,
            _ => Axis::Timing,
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ErrorType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CoarseClass {
    SE,
    QuickE,
    SlowE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Semantic,
    Timing,
}

/// Single-label class used for fine-grained evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FineLabel {
    CR,
    SE,
    QuickE,
    SlowE,
}

impl FineLabel {
    pub const ALL: [FineLabel; 4] = [FineLabel::CR, FineLabel::SE, FineLabel::QuickE, FineLabel::SlowE];

    pub fn as_str(self) -> &'static str {
        match self {
            FineLabel::CR => "CR",
            FineLabel::SE => "SE",
            FineLabel::QuickE => "QuickE",
            FineLabel::SlowE => "SlowE",
        }
    }
}

impl fmt::Display for FineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<CoarseClass> for FineLabel {
    fn from(c: CoarseClass) -> Self {
        match c {
            CoarseClass::SE => FineLabel::SE,
            CoarseClass::QuickE => FineLabel::QuickE,
            CoarseClass::SlowE => FineLabel::SlowE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorFinding {
    pub error_type: ErrorType,
    pub coarse_class: CoarseClass,
    pub axis: Axis,
    pub evidence: Interval,
    pub description: String,
}

impl ErrorFinding {
    pub fn new(error_type: ErrorType, evidence: Interval, description: String) -> Self {
        ErrorFinding {
            error_type,
            coarse_class: error_type.coarse_class(),
            axis: error_type.axis(),
            evidence,
            description,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteractionVerdict {
    pub score: u8,
    pub semantic_findings: Vec<ErrorFinding>,
    pub timing_findings: Vec<ErrorFinding>,
    pub semantic_summary: String,
    pub timing_summary: String,
}

/// Timing and turn-management failures of the system.
pub fn detect_timing_errors(
    events: &[InteractionEvent],
    decomp: &StructuralDecomposition,
    timeline: &DialogueTimeline,
    config: &AnalysisConfig,
) -> Vec<ErrorFinding> {
    let role = |s| timeline.role_of(s);
    let mut out = Vec::new();
    for ev in events {
        let by_system = role(&ev.initiator) == Some(Role::System) && role(&ev.responder) == Some(Role::User);
        let by_user = role(&ev.initiator) == Some(Role::User) && role(&ev.responder) == Some(Role::System);
        match ev.kind {
            EventKind::SuccessfulInterruption | EventKind::FailedInterruption
                if by_system && !timeline.labels().justified_interruption =>
            {
                out.push(ErrorFinding::new(
                    ErrorType::InappropriateBargeIn,
                    ev.interval,
                    format!(
                        "{} started talking over {} at {}",
                        ev.initiator,
                        ev.responder,
                        ev.interval.start()
                    ),
                ));
            }
            EventKind::FailedInterruption if by_user => {
                out.push(ErrorFinding::new(
                    ErrorType::IgnoredInterruption,
                    ev.interval,
                    format!(
                        "{} kept talking through {}'s interruption at {}",
                        ev.responder,
                        ev.initiator,
                        ev.interval.start()
                    ),
                ));
            }
            EventKind::Backchannel if by_user => {
                let system = timeline.other_track(&ev.initiator);
                let run = system.speech_run_from(ev.interval.start());
                if run == 0 {
                    continue;
                }
                let stop = TimePoint::from_ms(ev.interval.start_ms() + run);
                if stop.ms() <= ev.interval.end_ms() + config.ceding_window_ms {
                    let end = stop.max(ev.interval.end());
                    out.push(ErrorFinding::new(
                        ErrorType::OverlyDeferentialCeding,
                        Interval::new(ev.interval.start_ms(), end.ms()).expect("overlap starts before stop"),
                        format!(
                            "{} stopped at {} after a backchannel from {}",
                            ev.responder, stop, ev.initiator
                        ),
                    ));
                }
            }
            _ => {}
        }
    }
    for gap in &decomp.gaps {
        if gap.interval.duration_ms() > config.delayed_gap_ms {
            out.push(ErrorFinding::new(
                ErrorType::DelayedTurnTransition,
                gap.interval,
                format!(
                    "{} ms of silence before {} took the turn at {}",
                    gap.interval.duration_ms(),
                    gap.to_speaker,
                    gap.interval.end()
                ),
            ));
        }
    }
    out.sort_by_key(|f| (f.evidence, f.error_type));
    out
}

/// Judges the semantic axis of a timeline.
pub trait SemanticJudge {
    fn judge(&self, timeline: &DialogueTimeline) -> Result<Vec<ErrorFinding>, DetectorError>;
}

/// Reads the semantic error from scenario labels.
#[derive(Debug, Clone, Copy, Default)]
pub struct LabelPropagation;

impl SemanticJudge for LabelPropagation {
    fn judge(&self, timeline: &DialogueTimeline) -> Result<Vec<ErrorFinding>, DetectorError> {
        propagate_semantic_labels(timeline)
    }
}

/// One semantic finding when the scenario carries a semantic error label.
pub fn propagate_semantic_labels(timeline: &DialogueTimeline) -> Result<Vec<ErrorFinding>, DetectorError> {
    let Some(label) = &timeline.labels().error_type else {
        return Ok(Vec::new());
    };
    let error_type = ErrorType::parse(label)?;
    if error_type.axis() != Axis::Semantic {
        return Ok(Vec::new());
    }
    Ok(vec![ErrorFinding::new(
        error_type,
        timeline.span(),
        format!("scenario is labelled {}", error_type),
    )])
}

fn summarize(axis: &str, findings: &[ErrorFinding]) -> String {
    if findings.is_empty() {
        return format!("No {axis} issues found.");
    }
    let items: Vec<String> = findings
        .iter()
        .map(|f| format!("{} at {}: {}", f.error_type, f.evidence, f.description))
        .collect();
    format!("{} {axis} issue(s): {}.", findings.len(), items.join("; "))
}

/// Score 1 only when both axes are clean.
pub fn render_verdict(semantic: Vec<ErrorFinding>, timing: Vec<ErrorFinding>) -> InteractionVerdict {
    let score = u8::from(semantic.is_empty() && timing.is_empty());
    InteractionVerdict {
        score,
        semantic_summary: summarize("semantic", &semantic),
        timing_summary: summarize("timing", &timing),
        semantic_findings: semantic,
        timing_findings: timing,
    }
}

/// CR for clean verdicts, else the class of the most severe finding
/// (SE over QuickE over SlowE).
pub fn classify_fine_grained(verdict: &InteractionVerdict) -> FineLabel {
    if verdict.score == 1 {
        return FineLabel::CR;
    }
    verdict
        .semantic_findings
        .iter()
        .chain(&verdict.timing_findings)
        .map(|f| f.coarse_class)
        .min()
        .map_or(FineLabel::CR, FineLabel::from)
}
