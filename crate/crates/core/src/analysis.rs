//! End-to-end analysis of one timeline: structure, events, findings, verdict.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::detector::{
    classify_fine_grained, detect_timing_errors, render_verdict, Axis, CoarseClass, ErrorFinding, ErrorType, FineLabel,
    InteractionVerdict, LabelPropagation, SemanticJudge,
};
use crate::error::DetectorError;
use crate::events::{events_from, InteractionEvent};
use crate::schema::{EventEntry, Seconds};
use crate::structure::{decompose, StructuralDecomposition};
use crate::timeline::DialogueTimeline;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub decomposition: StructuralDecomposition,
    pub events: Vec<InteractionEvent>,
    pub verdict: InteractionVerdict,
    pub fine_grained_label: FineLabel,
}

impl AnalysisReport {
    /// The finding that decides the fine-grained label, if any.
    pub fn primary_error(&self) -> Option<ErrorType> {
        self.verdict
            .semantic_findings
            .iter()
            .chain(&self.verdict.timing_findings)
            .min_by_key(|f| f.coarse_class)
            .map(|f| f.error_type)
    }

    pub fn to_document(&self) -> ReportDocument {
        let finding = |f: &ErrorFinding| FindingEntry {
            error_type: f.error_type,
            coarse_class: f.coarse_class,
            axis: f.axis,
            start_time: Seconds(f.evidence.start_ms()),
            end_time: Seconds(f.evidence.end_ms()),
            description: f.description.clone(),
        };
        ReportDocument {
            score: self.verdict.score,
            fine_grained_label: self.fine_grained_label,
            error_type: self.primary_error(),
            semantic_findings: self.verdict.semantic_findings.iter().map(finding).collect(),
            timing_findings: self.verdict.timing_findings.iter().map(finding).collect(),
            semantic_summary: self.verdict.semantic_summary.clone(),
            timing_summary: self.verdict.timing_summary.clone(),
            interaction_events: self.events.iter().map(EventEntry::from_event).collect(),
            overlaps: self
                .decomposition
                .overlaps
                .iter()
                .map(|o| OverlapEntry {
                    start_time: Seconds(o.interval.start_ms()),
                    end_time: Seconds(o.interval.end_ms()),
                    floor_holder: o.floor_holder.to_string(),
                    incomer: o.incomer.to_string(),
                })
                .collect(),
            gaps: self
                .decomposition
                .gaps
                .iter()
                .map(|g| GapEntry {
                    start_time: Seconds(g.interval.start_ms()),
                    end_time: Seconds(g.interval.end_ms()),
                    from_speaker: g.from_speaker.to_string(),
                    to_speaker: g.to_speaker.to_string(),
                })
                .collect(),
            turns: self
                .decomposition
                .turns
                .iter()
                .map(|t| TurnEntry {
                    speaker: t.speaker.to_string(),
                    start_time: Seconds(t.interval.start_ms()),
                    end_time: Seconds(t.interval.end_ms()),
                    pauses: t.internal_pauses.len(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FindingEntry {
    pub error_type: ErrorType,
    pub coarse_class: CoarseClass,
    pub axis: Axis,
    pub start_time: Seconds,
    pub end_time: Seconds,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapEntry {
    pub start_time: Seconds,
    pub end_time: Seconds,
    pub floor_holder: String,
    pub incomer: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapEntry {
    pub start_time: Seconds,
    pub end_time: Seconds,
    pub from_speaker: String,
    pub to_speaker: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TurnEntry {
    pub speaker: String,
    pub start_time: Seconds,
    pub end_time: Seconds,
    pub pauses: usize,
}

/// JSON form of an [`AnalysisReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub score: u8,
    pub fine_grained_label: FineLabel,
    pub error_type: Option<ErrorType>,
    pub semantic_findings: Vec<FindingEntry>,
    pub timing_findings: Vec<FindingEntry>,
    pub semantic_summary: String,
    pub timing_summary: String,
    pub interaction_events: Vec<EventEntry>,
    pub overlaps: Vec<OverlapEntry>,
    pub gaps: Vec<GapEntry>,
    pub turns: Vec<TurnEntry>,
}

pub fn analyze_with(
    timeline: &DialogueTimeline,
    config: &AnalysisConfig,
    judge: &dyn SemanticJudge,
) -> Result<AnalysisReport, DetectorError> {
    let decomposition = decompose(timeline, config);
    let events = events_from(&decomposition, timeline, config);
    let timing = detect_timing_errors(&events, &decomposition, timeline, config);
    let semantic = judge.judge(timeline)?;
    let verdict = render_verdict(semantic, timing);
    let fine_grained_label = classify_fine_grained(&verdict);
    Ok(AnalysisReport {
        decomposition,
        events,
        verdict,
        fine_grained_label,
    })
}

/// Analysis with label-propagated semantic errors.
pub fn analyze(timeline: &DialogueTimeline, config: &AnalysisConfig) -> Result<AnalysisReport, DetectorError> {
    analyze_with(timeline, config, &LabelPropagation)
}
