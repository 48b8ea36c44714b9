//! Structural units of a dialogue: pauses, turns, gaps and overlaps.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::events::judge_backchannel;
use crate::timeline::{mutual_silences, overlap_intervals, ChannelTrack, DialogueTimeline, Interval, SpeakerId};

/// Intra-speaker silence bounded by that speaker's speech on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pause {
    pub speaker: SpeakerId,
    pub interval: Interval,
}

/// A maximal stretch of one speaker's speech, pauses included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Turn {
    pub speaker: SpeakerId,
    pub interval: Interval,
    /// Indices into the speaker's track.
    pub segment_indices: Vec<usize>,
    pub internal_pauses: Vec<Pause>,
}

/// Mutual silence between one speaker's turn and the other's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub interval: Interval,
    pub from_speaker: SpeakerId,
    pub to_speaker: SpeakerId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapUnit {
    pub interval: Interval,
    pub floor_holder: SpeakerId,
    pub incomer: SpeakerId,
    /// Index of the holder's turn in [`StructuralDecomposition::turns`].
    pub holder_turn: usize,
    pub incomer_turn: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StructuralDecomposition {
    pub turns: Vec<Turn>,
    pub gaps: Vec<Gap>,
    pub overlaps: Vec<OverlapUnit>,
    pub pauses: Vec<Pause>,
}

/// A change of floor between two adjacent turns that do not overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub prev: usize,
    pub next: usize,
    pub gap: Option<Gap>,
}

/// Decides whether the silence between segments `i` and `i + 1` of `track`
/// is one of its speaker's pauses.
///
/// The silence stays a pause unless the other speaker finishes a competitive
/// utterance inside it, or is still talking competitively when this speaker
/// resumes and the resumption does not hold the turn. A resumption holds the
/// turn when the other speaker started inside the silence less than the
/// resume window earlier and the resumed speech is itself competitive.
fn is_pause(track: &ChannelTrack, i: usize, timeline: &DialogueTimeline, config: &AnalysisConfig) -> bool {
    let segs = track.segments();
    let (p, q) = (segs[i].interval.end(), segs[i + 1].interval.start());
    let Some(silence) = Interval::try_from_ms(p.ms(), q.ms()) else {
        return true;
    };
    let other = timeline.other_track(track.speaker());
    let competitive: Vec<&Interval> = other
        .segments()
        .iter()
        .filter(|s| s.interval.intersects(&silence) && !judge_backchannel(s, config).is_backchannel)
        .map(|s| &s.interval)
        .collect();
    if competitive.is_empty() {
        return true;
    }
    if competitive.iter().any(|s| s.end() <= q) {
        return false;
    }
    // Exactly one competitive segment can still be running at q.
    let onset = competitive[0].start();
    onset >= p
        && q.ms() - onset.ms() <= config.resume_window_ms()
        && !judge_backchannel(&segs[i + 1], config).is_backchannel
}

fn turns_of(track: &ChannelTrack, timeline: &DialogueTimeline, config: &AnalysisConfig) -> Vec<Turn> {
    let segs = track.segments();
    let mut turns = Vec::new();
    let mut current: Option<Turn> = None;
    for (idx, seg) in segs.iter().enumerate() {
        match current.as_mut() {
            Some(turn) if is_pause(track, idx - 1, timeline, config) => {
                let prev_end = turn.interval.end_ms();
                if let Some(gap) = Interval::try_from_ms(prev_end, seg.interval.start_ms()) {
                    turn.internal_pauses.push(Pause {
                        speaker: track.speaker().clone(),
                        interval: gap,
                    });
                }
                turn.interval =
                    Interval::new(turn.interval.start_ms(), seg.interval.end_ms()).expect("segments are sorted");
                turn.segment_indices.push(idx);
            }
            _ => {
                turns.extend(current.take());
                current = Some(Turn {
                    speaker: track.speaker().clone(),
                    interval: seg.interval,
                    segment_indices: vec![idx],
                    internal_pauses: Vec::new(),
                });
            }
        }
    }
    turns.extend(current);
    turns
}

/// All pauses of both speakers, in chronological order.
pub fn detect_pauses(timeline: &DialogueTimeline, config: &AnalysisConfig) -> Vec<Pause> {
    let mut pauses: Vec<Pause> = build_turns(timeline, config)
        .into_iter()
        .flat_map(|t| t.internal_pauses)
        .collect();
    pauses.sort_by_key(|p| p.interval);
    pauses
}

/// Groups each speaker's segments into turns, ordered by start time.
pub fn build_turns(timeline: &DialogueTimeline, config: &AnalysisConfig) -> Vec<Turn> {
    let mut turns: Vec<(usize, Turn)> = timeline
        .tracks()
        .iter()
        .enumerate()
        .flat_map(|(ti, track)| turns_of(track, timeline, config).into_iter().map(move |t| (ti, t)))
        .collect();
    turns.sort_by_key(|(ti, t)| (t.interval.start(), t.interval.end(), *ti));
    turns.into_iter().map(|(_, t)| t).collect()
}

/// True when turn `idx` sits entirely inside a turn of the other speaker,
/// as backchannels and talked-over interjections do.
pub fn is_embedded(turns: &[Turn], idx: usize) -> bool {
    let t = &turns[idx];
    turns
        .iter()
        .any(|u| u.speaker != t.speaker && u.interval != t.interval && u.interval.covers(&t.interval))
}

/// Floor changes between non-embedded turns whose intervals do not overlap.
pub fn floor_transitions(turns: &[Turn], timeline: &DialogueTimeline) -> Vec<Transition> {
    let silences = mutual_silences(timeline);
    let mut out = Vec::new();
    let mut prev: Option<usize> = None;
    for idx in (0..turns.len()).filter(|&i| !is_embedded(turns, i)) {
        let Some(p) = prev else {
            prev = Some(idx);
            continue;
        };
        let (before, next) = (&turns[p], &turns[idx]);
        if next.interval.start() >= before.interval.end() && next.speaker != before.speaker {
            let gap = Interval::try_from_ms(before.interval.end_ms(), next.interval.start_ms())
                .filter(|g| silences.iter().any(|s| s.covers(g)))
                .map(|interval| Gap {
                    interval,
                    from_speaker: before.speaker.clone(),
                    to_speaker: next.speaker.clone(),
                });
            out.push(Transition {
                prev: p,
                next: idx,
                gap,
            });
        }
        if next.interval.end() >= before.interval.end() {
            prev = Some(idx);
        }
    }
    out
}

/// One gap per floor change with strictly positive mutual silence.
pub fn detect_gaps(turns: &[Turn], timeline: &DialogueTimeline) -> Vec<Gap> {
    floor_transitions(turns, timeline)
        .into_iter()
        .filter_map(|t| t.gap)
        .collect()
}

fn floor_holder_on_tie(turns: &[Turn], a: usize, b: usize) -> usize {
    let onset = turns[a].interval.start();
    let previous = turns
        .iter()
        .filter(|t| t.interval.end() <= onset)
        .max_by_key(|t| (t.interval.end(), t.interval.start()));
    match previous {
        Some(p) if p.speaker == turns[a].speaker => a,
        Some(p) if p.speaker == turns[b].speaker => b,
        _ if turns[a].speaker <= turns[b].speaker => a,
        _ => b,
    }
}

/// Pauses, turns, gaps and annotated overlaps of a timeline.
pub fn decompose(timeline: &DialogueTimeline, config: &AnalysisConfig) -> StructuralDecomposition {
    let turns = build_turns(timeline, config);
    let gaps = detect_gaps(&turns, timeline);
    let [ta, tb] = timeline.tracks();
    let owner = |speaker: &SpeakerId, iv: &Interval| {
        turns
            .iter()
            .position(|t| t.speaker == *speaker && t.interval.covers(iv))
            .expect("overlap lies inside a turn of each speaker")
    };
    let overlaps = overlap_intervals(timeline)
        .into_iter()
        .map(|iv| {
            let a = owner(ta.speaker(), &iv);
            let b = owner(tb.speaker(), &iv);
            let (sa, sb) = (turns[a].interval.start(), turns[b].interval.start());
            let holder = if sa < sb {
                a
            } else if sb < sa {
                b
            } else {
                floor_holder_on_tie(&turns, a, b)
            };
            let incomer = if holder == a { b } else { a };
            OverlapUnit {
                interval: iv,
                floor_holder: turns[holder].speaker.clone(),
                incomer: turns[incomer].speaker.clone(),
                holder_turn: holder,
                incomer_turn: incomer,
            }
        })
        .collect();
    let mut pauses: Vec<Pause> = turns.iter().flat_map(|t| t.internal_pauses.clone()).collect();
    pauses.sort_by_key(|p| p.interval);
    StructuralDecomposition {
        turns,
        gaps,
        overlaps,
        pauses,
    }
}
