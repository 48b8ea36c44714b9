//! Dual-track dialogue timelines and the interval algebra over them.
//!
//! All times are integer milliseconds from dialogue start. Intervals are
//! half-open, `[start, end)`, so two segments that share a boundary touch
//! without overlapping and an instant on a segment's end is silence.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TimelineError;

/// Milliseconds since dialogue start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePoint(u64);

impl TimePoint {
    pub const ZERO: TimePoint = TimePoint(0);

    pub const fn from_ms(ms: u64) -> Self {
        TimePoint(ms)
    }

    pub const fn ms(self) -> u64 {
        self.0
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:03}s", self.0 / 1000, self.0 % 1000)
    }
}

/// Non-empty half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Interval {
    start: TimePoint,
    end: TimePoint,
}

impl Interval {
    pub fn new(start_ms: u64, end_ms: u64) -> Result<Self, TimelineError> {
        if start_ms >= end_ms {
            return Err(TimelineError::EmptyInterval {
                start: start_ms,
                end: end_ms,
            });
        }
        Ok(Interval {
            start: TimePoint(start_ms),
            end: TimePoint(end_ms),
        })
    }

    /// Like [`Interval::new`] but returns `None` for empty ranges.
    pub fn try_from_ms(start_ms: u64, end_ms: u64) -> Option<Self> {
        Self::new(start_ms, end_ms).ok()
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn end(&self) -> TimePoint {
        self.end
    }

    pub fn start_ms(&self) -> u64 {
        self.start.0
    }

    pub fn end_ms(&self) -> u64 {
        self.end.0
    }

    pub fn duration_ms(&self) -> u64 {
        self.end.0 - self.start.0
    }

    pub fn contains(&self, t: TimePoint) -> bool {
        self.start <= t && t < self.end
    }

    /// True when `other` lies entirely inside `self`.
    pub fn covers(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(Interval { start, end })
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.intersect(other).is_some()
    }

    pub fn shifted(&self, delta_ms: u64) -> Interval {
        Interval {
            start: TimePoint(self.start.0 + delta_ms),
            end: TimePoint(self.end.0 + delta_ms),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Speaker label as it appears in the transcript ("User", "Assistant", ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeakerId(String);

impl SpeakerId {
    pub fn new(id: impl Into<String>) -> Self {
        SpeakerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SpeakerId {
    fn from(s: &str) -> Self {
        SpeakerId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeechSegment {
    pub interval: Interval,
    pub text: Option<String>,
}

impl SpeechSegment {
    pub fn new(interval: Interval, text: Option<String>) -> Result<Self, TimelineError> {
        if let Some(t) = &text {
            if t.trim().is_empty() {
                return Err(TimelineError::EmptyText);
            }
        }
        Ok(SpeechSegment { interval, text })
    }

    /// Segment without a transcript.
    pub fn silent_text(interval: Interval) -> Self {
        SpeechSegment { interval, text: None }
    }
}

/// One speaker's channel: sorted, pairwise-disjoint speech segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelTrack {
    speaker: SpeakerId,
    segments: Vec<SpeechSegment>,
}

impl ChannelTrack {
    pub fn new(speaker: SpeakerId, segments: Vec<SpeechSegment>) -> Result<Self, TimelineError> {
        for pair in segments.windows(2) {
            if pair[1].interval.start() < pair[0].interval.end() {
                return Err(TimelineError::SelfOverlap {
                    speaker: speaker.0.clone(),
                    at: pair[1].interval.start_ms(),
                });
            }
        }
        Ok(ChannelTrack { speaker, segments })
    }

    pub fn speaker(&self) -> &SpeakerId {
        &self.speaker
    }

    pub fn segments(&self) -> &[SpeechSegment] {
        &self.segments
    }

    /// Speech as maximal runs; touching segments are fused.
    pub fn speech_runs(&self) -> Vec<Interval> {
        let mut runs: Vec<Interval> = Vec::with_capacity(self.segments.len());
        for seg in &self.segments {
            match runs.last_mut() {
                Some(last) if last.end == seg.interval.start => last.end = seg.interval.end,
                _ => runs.push(seg.interval),
            }
        }
        runs
    }

    /// Index of the segment active at `t`, if any.
    pub fn segment_at(&self, t: TimePoint) -> Option<usize> {
        let idx = self.segments.partition_point(|s| s.interval.end <= t);
        (idx < self.segments.len() && self.segments[idx].interval.contains(t)).then_some(idx)
    }

    /// Length of uninterrupted speech starting at `t` (0 when silent at `t`).
    pub fn speech_run_from(&self, t: TimePoint) -> u64 {
        self.speech_runs()
            .iter()
            .find(|r| r.contains(t))
            .map_or(0, |r| r.end.0 - t.0)
    }

    /// Earliest segment onset at or after `t`.
    pub fn next_onset_at_or_after(&self, t: TimePoint) -> Option<TimePoint> {
        self.segments.iter().map(|s| s.interval.start).find(|&s| s >= t)
    }

    fn shifted(&self, delta_ms: u64) -> ChannelTrack {
        ChannelTrack {
            speaker: self.speaker.clone(),
            segments: self
                .segments
                .iter()
                .map(|s| SpeechSegment {
                    interval: s.interval.shifted(delta_ms),
                    text: s.text.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    System,
}

/// Which speaker plays the user and which the system under evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMap {
    pub user: SpeakerId,
    pub system: SpeakerId,
}

impl RoleMap {
    pub fn new(user: impl Into<SpeakerId>, system: impl Into<SpeakerId>) -> Self {
        RoleMap {
            user: user.into(),
            system: system.into(),
        }
    }

    /// Default assignment for the conventional "User"/"Assistant" (or
    /// "System") labels, matched case-insensitively.
    pub fn infer<'a>(speakers: impl IntoIterator<Item = &'a SpeakerId>) -> Result<RoleMap, TimelineError> {
        let mut user = None;
        let mut system = None;
        for s in speakers {
            match s.0.to_ascii_lowercase().as_str() {
                "user" => user = Some(s.clone()),
                "assistant" | "system" => system = Some(s.clone()),
                _ => return Err(TimelineError::MissingRole(s.0.clone())),
            }
        }
        Ok(RoleMap {
            user: user.unwrap_or_else(|| SpeakerId::new("User")),
            system: system.unwrap_or_else(|| SpeakerId::new("Assistant")),
        })
    }

    pub fn role_of(&self, speaker: &SpeakerId) -> Option<Role> {
        if *speaker == self.user {
            Some(Role::User)
        } else if *speaker == self.system {
            Some(Role::System)
        } else {
            None
        }
    }
}

impl From<String> for SpeakerId {
    fn from(s: String) -> Self {
        SpeakerId(s)
    }
}

/// Scenario-level labels carried alongside a timeline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioLabels {
    pub event_type: Option<String>,
    pub error_type: Option<String>,
    /// System-initiated interruptions in this scenario are justified and
    /// must not be reported as barge-ins.
    pub justified_interruption: bool,
}

/// Two speaker tracks, a role assignment and the dialogue span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DialogueTimeline {
    tracks: [ChannelTrack; 2],
    roles: RoleMap,
    span: Interval,
    labels: ScenarioLabels,
}

impl DialogueTimeline {
    /// Validates and assembles a timeline. When `span` is `None` it defaults
    /// to `[0, last end + 1 ms]`.
    pub fn new(
        tracks: Vec<ChannelTrack>,
        roles: RoleMap,
        span: Option<Interval>,
        labels: ScenarioLabels,
    ) -> Result<Self, TimelineError> {
        let [a, b]: [ChannelTrack; 2] = tracks
            .try_into()
            .map_err(|v: Vec<ChannelTrack>| TimelineError::SpeakerCount(v.len()))?;
        if a.speaker == b.speaker {
            return Err(TimelineError::DuplicateSpeaker(a.speaker.0.clone()));
        }
        for who in [&roles.user, &roles.system] {
            if *who != a.speaker && *who != b.speaker {
                return Err(TimelineError::UnknownRoleSpeaker(who.0.clone()));
            }
        }
        if roles.user == roles.system {
            return Err(TimelineError::MissingRole(b.speaker.0.clone()));
        }
        let last_end = a
            .segments
            .iter()
            .chain(&b.segments)
            .map(|s| s.interval.end.0)
            .max()
            .unwrap_or(0);
        let span = match span {
            Some(s) => s,
            None => Interval::new(0, last_end + 1)?,
        };
        for seg in a.segments.iter().chain(&b.segments) {
            if !span.covers(&seg.interval) {
                return Err(TimelineError::OutsideSpan {
                    start: seg.interval.start_ms(),
                    end: seg.interval.end_ms(),
                });
            }
        }
        Ok(DialogueTimeline {
            tracks: [a, b],
            roles,
            span,
            labels,
        })
    }

    pub fn tracks(&self) -> &[ChannelTrack; 2] {
        &self.tracks
    }

    pub fn roles(&self) -> &RoleMap {
        &self.roles
    }

    pub fn span(&self) -> Interval {
        self.span
    }

    pub fn labels(&self) -> &ScenarioLabels {
        &self.labels
    }

    pub fn track(&self, speaker: &SpeakerId) -> Option<&ChannelTrack> {
        self.tracks.iter().find(|t| t.speaker == *speaker)
    }

    /// The track that is not `speaker`'s.
    pub fn other_track(&self, speaker: &SpeakerId) -> &ChannelTrack {
        if self.tracks[0].speaker == *speaker {
            &self.tracks[1]
        } else {
            &self.tracks[0]
        }
    }

    pub fn role_of(&self, speaker: &SpeakerId) -> Option<Role> {
        self.roles.role_of(speaker)
    }

    pub fn is_system(&self, speaker: &SpeakerId) -> bool {
        self.role_of(speaker) == Some(Role::System)
    }

    pub fn segment_count(&self) -> usize {
        self.tracks.iter().map(|t| t.segments.len()).sum()
    }

    /// Same dialogue delayed by `delta_ms`.
    pub fn shifted(&self, delta_ms: u64) -> DialogueTimeline {
        DialogueTimeline {
            tracks: [self.tracks[0].shifted(delta_ms), self.tracks[1].shifted(delta_ms)],
            roles: self.roles.clone(),
            span: self.span.shifted(delta_ms),
            labels: self.labels.clone(),
        }
    }

    /// Same dialogue with the track order reversed.
    pub fn with_swapped_tracks(&self) -> DialogueTimeline {
        DialogueTimeline {
            tracks: [self.tracks[1].clone(), self.tracks[0].clone()],
            roles: self.roles.clone(),
            span: self.span,
            labels: self.labels.clone(),
        }
    }

    /// Renames speakers (and the role map) through `rename`.
    pub fn relabeled(&self, rename: impl Fn(&SpeakerId) -> SpeakerId) -> DialogueTimeline {
        let retrack = |t: &ChannelTrack| ChannelTrack {
            speaker: rename(&t.speaker),
            segments: t.segments.clone(),
        };
        DialogueTimeline {
            tracks: [retrack(&self.tracks[0]), retrack(&self.tracks[1])],
            roles: RoleMap {
                user: rename(&self.roles.user),
                system: rename(&self.roles.system),
            },
            span: self.span,
            labels: self.labels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhonatoryState {
    Speech,
    Silence,
}

/// Whether the track's speaker is producing speech at `t`.
pub fn phonatory_state(track: &ChannelTrack, span: Interval, t: TimePoint) -> Result<PhonatoryState, TimelineError> {
    // The closing instant of the span is addressable so that every segment
    // end inside the span can be queried.
    if t < span.start || t > span.end {
        return Err(TimelineError::TimeOutsideSpan(t.0));
    }
    Ok(match track.segment_at(t) {
        Some(_) => PhonatoryState::Speech,
        None => PhonatoryState::Silence,
    })
}

/// Complement of `runs` (sorted, disjoint) within `span`.
fn complement(runs: &[Interval], span: Interval) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut cursor = span.start.0;
    for r in runs {
        let (s, e) = (r.start.0.max(span.start.0), r.end.0.min(span.end.0));
        if s >= e {
            continue;
        }
        if let Some(gap) = Interval::try_from_ms(cursor, s) {
            out.push(gap);
        }
        cursor = cursor.max(e);
    }
    if let Some(tail) = Interval::try_from_ms(cursor, span.end.0) {
        out.push(tail);
    }
    out
}

/// Maximal silences of one track inside `span`.
pub fn silence_segments(track: &ChannelTrack, span: Interval) -> Vec<Interval> {
    complement(&track.speech_runs(), span)
}

/// Maximal intervals where both speakers talk at once.
pub fn overlap_intervals(timeline: &DialogueTimeline) -> Vec<Interval> {
    let a = timeline.tracks[0].speech_runs();
    let b = timeline.tracks[1].speech_runs();
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        if let Some(x) = a[i].intersect(&b[j]) {
            out.push(x);
        }
        if a[i].end <= b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Maximal intervals of the span where neither speaker talks.
pub fn mutual_silences(timeline: &DialogueTimeline) -> Vec<Interval> {
    let mut all: Vec<Interval> = timeline.tracks.iter().flat_map(|t| t.speech_runs()).collect();
    all.sort();
    let mut union: Vec<Interval> = Vec::with_capacity(all.len());
    for r in all {
        match union.last_mut() {
            Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
            _ => union.push(r),
        }
    }
    complement(&union, timeline.span)
}
