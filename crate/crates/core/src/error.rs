use thiserror::Error;

/// Problems found while building or validating a [`crate::DialogueTimeline`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error("interval start {start} ms is not before end {end} ms")]
    EmptyInterval { start: u64, end: u64 },
    #[error("invalid timestamp {0:?}")]
    BadTimestamp(String),
    #[error("expected exactly two speakers, found {0}")]
    SpeakerCount(usize),
    #[error("speaker ids must be distinct (both tracks are {0:?})")]
    DuplicateSpeaker(String),
    #[error("no role assignment for speaker {0:?}")]
    MissingRole(String),
    #[error("role map names speaker {0:?} which has no track")]
    UnknownRoleSpeaker(String),
    #[error("segments of speaker {speaker:?} overlap or are unsorted at {at} ms")]
    SelfOverlap { speaker: String, at: u64 },
    #[error("segment [{start}, {end}) ms lies outside the dialogue span")]
    OutsideSpan { start: u64, end: u64 },
    #[error("segment text is empty after trimming")]
    EmptyText,
    #[error("time {0} ms is outside the dialogue span")]
    TimeOutsideSpan(u64),
    #[error("malformed timeline document: {0}")]
    Document(String),
}

/// Marker-language problems in a scenario script document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("malformed script document: {0}")]
    Document(String),
    #[error("turn {turn}: unknown marker [{marker}]")]
    UnknownMarker { turn: usize, marker: String },
    #[error("turn {turn}: unterminated marker starting at byte {offset}")]
    UnterminatedMarker { turn: usize, offset: usize },
    #[error("turn {turn}: marker [{marker}] is only allowed at the start of a turn")]
    MisplacedPrefix { turn: usize, marker: String },
    #[error("turn {turn}: more than one interrupt anchor")]
    DuplicateInteract { turn: usize },
    #[error("turn {turn}: interrupt anchor has no latent tail after it")]
    MissingLatentTail { turn: usize },
    #[error("turn {turn}: backchannel turn does not follow a turn with an inline [BC] anchor")]
    OrphanBackchannel { turn: usize },
    #[error("turn {turn}: [overlaps_assistant] turn does not follow a [user_interrupt_starts] anchor")]
    OrphanOverlap { turn: usize },
    #[error("turn {turn}: no speakable words")]
    EmptyTurn { turn: usize },
    #[error("item {item}: malformed pause duration {value:?}")]
    BadPause { item: usize, value: String },
}

/// A parsed script whose markers cannot be rendered consistently.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("turn {turn}: [barge_in] needs a preceding turn by another speaker containing [PAUSE]")]
    BargeInWithoutPause { turn: usize },
    #[error("turn {turn}: {reason}")]
    Contradiction { turn: usize, reason: String },
    #[error("pause directive at item {item} is not followed by a plain turn")]
    DanglingPause { item: usize },
    #[error("compiled timeline is invalid: {0}")]
    Timeline(#[from] TimelineError),
    #[error("duration model parameter {0} must be positive")]
    BadModel(&'static str),
    #[error("script label: {0}")]
    UnknownLabel(#[from] DetectorError),
}

/// Corpus generation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("corpus mix requests zero scenarios")]
    EmptyMix,
    #[error("no templates for scenario class {0}")]
    EmptyPool(&'static str),
    #[error("unknown scenario class {0:?}")]
    UnknownClass(String),
    #[error("malformed mix entry {0:?} (expected class=count)")]
    BadMixEntry(String),
    #[error("template for class {class} failed: {source}")]
    Script { class: &'static str, source: ScriptError },
    #[error("template for class {class} failed to compile: {source}")]
    Compile { class: &'static str, source: CompileError },
}

/// Failure-taxonomy errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectorError {
    #[error("unrecognized error_type {0:?}")]
    UnknownErrorType(String),
}

/// Reward, advantage and objective arithmetic errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("reward weights must be non-negative and sum to 1 (got {fmt} + {acc})")]
    BadWeights { fmt: f64, acc: f64 },
    #[error("ground-truth score must be 0 or 1, got {0}")]
    BadGroundTruth(i64),
    #[error("a group needs at least 2 members, got {0}")]
    GroupTooSmall(usize),
    #[error("importance ratio must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("clip range must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("group has no importance ratios")]
    MissingRatios,
    #[error("expected {expected} ratios, got {got}")]
    RatioCount { expected: usize, got: usize },
    #[error("reward must be finite, got {0}")]
    NonFinite(f64),
}

/// Classification metric input errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("no items to score")]
    Empty,
    #[error("class set is empty or has duplicates")]
    BadClassSet,
    #[error("value {0:?} is not in the class set")]
    UnknownClass(String),
}
