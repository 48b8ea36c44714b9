//! Functional interaction events: smooth transitions, successful and failed
//! interruptions, and backchannels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::structure::{decompose, floor_transitions, Gap, OverlapUnit, StructuralDecomposition, Turn};
use crate::timeline::{DialogueTimeline, Interval, SpeakerId, SpeechSegment, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "Smooth_Turn_Transition")]
    SmoothTurnTransition,
    #[serde(rename = "Successful_Interruption")]
    SuccessfulInterruption,
    #[serde(rename = "Failed_Interruption")]
    FailedInterruption,
    #[serde(rename = "Backchannel")]
    Backchannel,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SmoothTurnTransition => "Smooth_Turn_Transition",
            EventKind::SuccessfulInterruption => "Successful_Interruption",
            EventKind::FailedInterruption => "Failed_Interruption",
            EventKind::Backchannel => "Backchannel",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        [
            EventKind::SmoothTurnTransition,
            EventKind::SuccessfulInterruption,
            EventKind::FailedInterruption,
            EventKind::Backchannel,
        ]
        .into_iter()
        .find(|k| k.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An event with its time evidence. `initiator` is the incoming speaker (the
/// new speaker, for transitions); `responder` is the one already holding the
/// floor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteractionEvent {
    pub kind: EventKind,
    pub interval: Interval,
    pub initiator: SpeakerId,
    pub responder: SpeakerId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BackchannelJudgment {
    pub is_backchannel: bool,
    pub matched_lexicon: bool,
    pub duration_ms: u64,
    pub word_count: usize,
}

/// Lowercases, drops bracketed markers and punctuation other than in-word
/// hyphens and apostrophes, and collapses whitespace.
pub fn normalize_utterance(text: &str) -> String {
    let mut stripped = String::with_capacity(text.len());
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth > 0 => {}
            c if c.is_alphanumeric() || c == '-' || c == '\'' => stripped.extend(c.to_lowercase()),
            _ => stripped.push(' '),
        }
    }
    stripped
        .split_whitespace()
        .map(|w| w.trim_matches(|c| c == '-' || c == '\''))
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Words that carry at least one letter or digit.
pub fn word_count(text: &str) -> usize {
    normalize_utterance(text)
        .split(' ')
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .count()
}

/// Short listener signal test: a hard duration cap plus either a lexicon
/// hit or a small word count. Without text, duration alone decides.
pub fn judge_backchannel(segment: &SpeechSegment, config: &AnalysisConfig) -> BackchannelJudgment {
    let duration_ms = segment.interval.duration_ms();
    let short = duration_ms <= config.backchannel_max_ms;
    match &segment.text {
        Some(text) => {
            let normalized = normalize_utterance(text);
            let matched_lexicon = config.backchannel_lexicon.contains(&normalized);
            let words = word_count(text);
            BackchannelJudgment {
                is_backchannel: short && (matched_lexicon || words <= config.backchannel_max_words),
                matched_lexicon,
                duration_ms,
                word_count: words,
            }
        }
        None => BackchannelJudgment {
            is_backchannel: short,
            matched_lexicon: false,
            duration_ms,
            word_count: 0,
        },
    }
}

/// Smooth transition between two non-overlapping adjacent turns of
/// different speakers. Gap length is not judged here.
pub fn classify_transition(
    prev: &Turn,
    gap: Option<&Gap>,
    next: &Turn,
    _config: &AnalysisConfig,
) -> Option<InteractionEvent> {
    if prev.speaker == next.speaker || next.interval.start() < prev.interval.end() {
        return None;
    }
    let interval = match gap {
        Some(g) => g.interval,
        None => {
            let latch = prev.interval.end_ms();
            let end = next.interval.start_ms().max(latch + 1);
            Interval::new(latch, end).expect("non-empty by construction")
        }
    };
    Some(InteractionEvent {
        kind: EventKind::SmoothTurnTransition,
        interval,
        initiator: next.speaker.clone(),
        responder: prev.speaker.clone(),
    })
}

/// Resolves an overlap by who holds the floor once it ends.
pub fn classify_overlap(
    unit: &OverlapUnit,
    _decomp: &StructuralDecomposition,
    timeline: &DialogueTimeline,
    config: &AnalysisConfig,
) -> InteractionEvent {
    let holder = timeline.track(&unit.floor_holder).expect("holder has a track");
    let incomer = timeline.track(&unit.incomer).expect("incomer has a track");
    let end = unit.interval.end();
    let cw = config.continuation_window_ms;

    let holder_tail = holder.speech_run_from(end);
    let incomer_tail = incomer.speech_run_from(end);
    let retained = if holder_tail > 0 {
        true
    } else if incomer_tail >= cw {
        false
    } else {
        // Both quiet within a moment: whoever speaks next has the floor.
        let quiet = TimePoint::from_ms(end.ms() + incomer_tail);
        let horizon = quiet.ms() + config.resume_window_ms();
        let next_holder = holder.next_onset_at_or_after(quiet).filter(|t| t.ms() <= horizon);
        let next_incomer = incomer
            .next_onset_at_or_after(TimePoint::from_ms(quiet.ms() + 1))
            .filter(|t| t.ms() <= horizon);
        match (next_holder, next_incomer) {
            (Some(h), Some(i)) => h <= i,
            (Some(_), None) => true,
            _ => false,
        }
    };

    let kind = if !retained {
        EventKind::SuccessfulInterruption
    } else {
        let utterance = incomer
            .segment_at(unit.interval.start())
            .map(|i| &incomer.segments()[i])
            .expect("incomer speaks during the overlap");
        if judge_backchannel(utterance, config).is_backchannel {
            EventKind::Backchannel
        } else {
            EventKind::FailedInterruption
        }
    };
    InteractionEvent {
        kind,
        interval: unit.interval,
        initiator: unit.incomer.clone(),
        responder: unit.floor_holder.clone(),
    }
}

/// Events from an existing decomposition of `timeline`.
pub fn events_from(
    decomp: &StructuralDecomposition,
    timeline: &DialogueTimeline,
    config: &AnalysisConfig,
) -> Vec<InteractionEvent> {
    let mut events: Vec<InteractionEvent> = floor_transitions(&decomp.turns, timeline)
        .iter()
        .filter_map(|t| classify_transition(&decomp.turns[t.prev], t.gap.as_ref(), &decomp.turns[t.next], config))
        .collect();
    events.extend(
        decomp
            .overlaps
            .iter()
            .filter(|u| u.interval.duration_ms() >= config.min_overlap_ms)
            .map(|u| classify_overlap(u, decomp, timeline, config)),
    );
    events.sort_by_key(|e| (e.interval, e.kind));
    events
}

/// Chronological event list of a timeline.
pub fn extract_events(timeline: &DialogueTimeline, config: &AnalysisConfig) -> Vec<InteractionEvent> {
    events_from(&decompose(timeline, config), timeline, config)
}
