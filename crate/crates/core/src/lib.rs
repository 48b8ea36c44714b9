//! Analysis of dual-track spoken-dialogue timelines, a compiler from
//! marker-annotated scripts to labelled timelines, and reward arithmetic for
//! training and scoring evaluators of such dialogues.

pub mod analysis;
pub mod config;
pub mod detector;
pub mod error;
pub mod events;
pub mod reward;
pub mod scenario;
pub mod schema;
pub mod structure;
pub mod timeline;

pub use analysis::{analyze, analyze_with, AnalysisReport, ReportDocument};
pub use config::AnalysisConfig;
pub use detector::{
    classify_fine_grained, detect_timing_errors, propagate_semantic_labels, render_verdict, Axis, CoarseClass,
    ErrorFinding, ErrorType, FineLabel, InteractionVerdict, LabelPropagation, SemanticJudge,
};
pub use error::{CompileError, CorpusError, DetectorError, MetricsError, RewardError, ScriptError, TimelineError};
pub use events::{
    classify_overlap, classify_transition, extract_events, judge_backchannel, BackchannelJudgment, EventKind,
    InteractionEvent,
};
pub use reward::{
    clipped_term, compute_metrics, group_advantages, grpo_objective, parse_evaluation, reward, AdvantageSet,
    CandidateGroup, EvaluationOutput, MetricsReport, RewardWeights,
};
pub use scenario::{
    compile, generate_corpus, generate_corpus_parallel, parse_script, parse_script_str, BuiltinTemplates,
    CompiledScenario, CorpusMix, CorpusScenario, DurationModel, ScenarioClass, ScenarioScript, TemplateSet,
};
pub use schema::{
    parse_document, parse_document_str, timeline_to_document, validate_timeline, DialogueDocument, EventEntry, Fixed6,
    Seconds, TimelineDocument,
};
pub use structure::{
    build_turns, decompose, detect_gaps, detect_pauses, Gap, OverlapUnit, Pause, StructuralDecomposition, Turn,
};
pub use timeline::{
    mutual_silences, overlap_intervals, phonatory_state, silence_segments, ChannelTrack, DialogueTimeline, Interval,
    PhonatoryState, Role, RoleMap, ScenarioLabels, SpeakerId, SpeechSegment, TimePoint,
};
