//! Renders a script onto two speech tracks with a fixed duration model and
//! records the events the rendering creates.

use serde::{Deserialize, Serialize};

use crate::detector::ErrorType;
use crate::error::CompileError;
use crate::events::{EventKind, InteractionEvent};
use crate::scenario::script::{Marker, Piece, Prefix, ScenarioScript, ScriptItem, SpokenTurn};
use crate::schema::{timeline_to_document, DialogueDocument};
use crate::timeline::{ChannelTrack, DialogueTimeline, Interval, RoleMap, ScenarioLabels, SpeakerId, SpeechSegment};

/// Timing used in place of synthesized audio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DurationModel {
    pub speech_rate_wpm: f64,
    pub inter_turn_gap_ms: u64,
    /// Silence inserted for `[PAUSE]`.
    pub intra_pause_ms: u64,
    /// Barge-in onset after the start of the interrupted speaker's pause.
    pub barge_in_offset_ms: u64,
    pub backchannel_dur_ms: u64,
    /// How long a speaker keeps talking after someone starts over them
    /// before stopping.
    pub interrupt_reaction_ms: u64,
}

impl Default for DurationModel {
    fn default() -> Self {
        DurationModel {
            speech_rate_wpm: 150.0,
            inter_turn_gap_ms: 400,
            intra_pause_ms: 800,
            barge_in_offset_ms: 300,
            backchannel_dur_ms: 500,
            interrupt_reaction_ms: 250,
        }
    }
}

impl DurationModel {
    pub fn validate(&self) -> Result<(), CompileError> {
        if !(self.speech_rate_wpm.is_finite() && self.speech_rate_wpm > 0.0) || self.word_ms() == 0 {
            return Err(CompileError::BadModel("speech_rate_wpm"));
        }
        let fields = [
            ("inter_turn_gap_ms", self.inter_turn_gap_ms),
            ("intra_pause_ms", self.intra_pause_ms),
            ("barge_in_offset_ms", self.barge_in_offset_ms),
            ("backchannel_dur_ms", self.backchannel_dur_ms),
            ("interrupt_reaction_ms", self.interrupt_reaction_ms),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(CompileError::BadModel(name)),
            None => Ok(()),
        }
    }

    pub fn word_ms(&self) -> u64 {
        (60_000.0 / self.speech_rate_wpm).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompiledScenario {
    pub timeline: DialogueTimeline,
    pub ground_truth_events: Vec<InteractionEvent>,
    pub ground_truth_error: Option<ErrorType>,
    pub transcript_meta: DialogueDocument,
}

#[derive(Debug, Clone)]
struct Seg {
    start: u64,
    end: u64,
    words: Vec<(u64, String)>,
}

/// Where a rendered turn left its anchors.
#[derive(Debug, Clone, Default)]
struct TurnMarks {
    speaker: usize,
    start: u64,
    /// End of the last rendered word.
    spoken_end: u64,
    last_pause_start: Option<u64>,
    /// Backchannel anchor time and whether words follow it.
    bc_anchor: Option<(u64, bool)>,
    interact_stop: Option<u64>,
    interrupt_anchor: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ClaimKind {
    Fixed(EventKind),
    /// Successful when the incomer outlasts the holder, failed otherwise.
    BargeIn,
}

#[derive(Debug, Clone)]
struct Claim {
    turn: usize,
    kind: ClaimKind,
    incomer: usize,
    holder: usize,
    /// First segment of the incoming turn.
    incoming: (u64, u64),
}

struct FloorTurn {
    speaker: usize,
    start: u64,
    end: u64,
}

struct Renderer<'a> {
    model: &'a DurationModel,
    word_ms: u64,
    speakers: Vec<SpeakerId>,
    segs: Vec<Vec<Seg>>,
    floor: Vec<FloorTurn>,
    claims: Vec<Claim>,
    smooth: Vec<InteractionEvent>,
}

fn contradiction(turn: usize, reason: impl Into<String>) -> CompileError {
    CompileError::Contradiction {
        turn,
        reason: reason.into(),
    }
}

impl Renderer<'_> {
    fn speaker_index(&mut self, name: &str) -> Result<usize, CompileError> {
        if let Some(i) = self.speakers.iter().position(|s| s.as_str() == name) {
            return Ok(i);
        }
        if self.speakers.len() == 2 {
            return Err(CompileError::Timeline(crate::error::TimelineError::SpeakerCount(3)));
        }
        self.speakers.push(SpeakerId::new(name));
        self.segs.push(Vec::new());
        Ok(self.speakers.len() - 1)
    }

    fn max_end(&self) -> u64 {
        self.segs.iter().flatten().map(|s| s.end).max().unwrap_or(0)
    }

    /// Floor turn with the latest end (later start on ties).
    fn floor_turn(&self) -> Option<&FloorTurn> {
        self.floor.iter().max_by_key(|f| (f.end, f.start))
    }

    fn push_segment(&mut self, speaker: usize, seg: Seg) {
        let track = &mut self.segs[speaker];
        match track.last_mut() {
            Some(last) if last.end == seg.start => {
                last.end = seg.end;
                last.words.extend(seg.words);
            }
            _ => track.push(seg),
        }
    }

    /// Lays the turn's words out from `start`; the tail after `[INTERACT]`
    /// is not rendered.
    fn render(&mut self, speaker: usize, turn: &SpokenTurn, start: u64) -> (TurnMarks, Option<(u64, u64)>) {
        let mut marks = TurnMarks {
            speaker,
            start,
            spoken_end: start,
            ..TurnMarks::default()
        };
        let mut cursor = start;
        let mut open: Option<Seg> = None;
        let mut first: Option<(u64, u64)> = None;
        let mut close = |open: &mut Option<Seg>, this: &mut Self| {
            if let Some(seg) = open.take() {
                first.get_or_insert((seg.start, seg.end));
                this.push_segment(speaker, seg);
            }
        };
        for (i, piece) in turn.pieces.iter().enumerate() {
            match piece {
                Piece::Word(w) => {
                    let seg = open.get_or_insert_with(|| Seg {
                        start: cursor,
                        end: cursor,
                        words: Vec::new(),
                    });
                    seg.words.push((cursor, w.clone()));
                    cursor += self.word_ms;
                    seg.end = cursor;
                    marks.spoken_end = cursor;
                }
                Piece::Mark(Marker::Pause) => {
                    close(&mut open, self);
                    marks.last_pause_start = Some(cursor);
                    cursor += self.model.intra_pause_ms;
                }
                Piece::Mark(Marker::Interact) => {
                    close(&mut open, self);
                    marks.interact_stop = Some(cursor);
                    break;
                }
                Piece::Mark(Marker::Backchannel) => {
                    let words_follow = turn.pieces[i..].iter().any(|p| matches!(p, Piece::Word(_)));
                    marks.bc_anchor = Some((cursor, words_follow));
                }
                Piece::Mark(Marker::UserInterruptStarts) => marks.interrupt_anchor = Some(cursor),
                Piece::Mark(_) => {}
            }
        }
        close(&mut open, self);
        (marks, first)
    }

    /// Stops `speaker` at `at`: later speech is dropped, words already
    /// started are kept.
    fn cut(&mut self, speaker: usize, at: u64) {
        let track = &mut self.segs[speaker];
        track.retain(|s| s.start < at);
        if let Some(last) = track.last_mut() {
            if last.end > at {
                last.end = at;
                last.words.retain(|(t, _)| *t < at);
            }
        }
        for f in self.floor.iter_mut().filter(|f| f.speaker == speaker && f.end > at) {
            f.end = at.max(f.start + 1);
        }
    }

    fn speech_end(&self, turn_first: Option<(u64, u64)>, speaker: usize) -> u64 {
        // End of the contiguous run that starts with the turn's first segment.
        let Some((s, _)) = turn_first else { return 0 };
        let runs = runs_of(&self.segs[speaker]);
        runs.iter().find(|r| r.0 <= s && s < r.1).map_or(0, |r| r.1)
    }
}

fn runs_of(segs: &[Seg]) -> Vec<(u64, u64)> {
    let mut runs: Vec<(u64, u64)> = Vec::new();
    for s in segs {
        match runs.last_mut() {
            Some(last) if last.1 == s.start => last.1 = s.end,
            _ => runs.push((s.start, s.end)),
        }
    }
    runs
}

/// Compiles a script into a labelled timeline.
pub fn compile(script: &ScenarioScript, model: &DurationModel) -> Result<CompiledScenario, CompileError> {
    model.validate()?;
    let ground_truth_error = script.error_type.as_deref().map(ErrorType::parse).transpose()?;
    let mut r = Renderer {
        model,
        word_ms: model.word_ms(),
        speakers: Vec::new(),
        segs: Vec::new(),
        floor: Vec::new(),
        claims: Vec::new(),
        smooth: Vec::new(),
    };

    let mut prev: Option<TurnMarks> = None;
    let mut pending_pause: Option<(usize, u64)> = None;
    // Anchor speaker must continue from this time (backchannel anchored at
    // the end of a turn).
    let mut must_continue: Option<(usize, u64)> = None;
    // Speaker that must take the next turn (after ceding).
    let mut must_speak: Option<usize> = None;
    let mut rendered_any = false;

    for (idx, item) in script.items.iter().enumerate() {
        let turn = match item {
            ScriptItem::Pause(p) => {
                if pending_pause.is_some() || must_continue.is_some() || must_speak.is_some() {
                    return Err(CompileError::DanglingPause { item: idx });
                }
                if let Some(pm) = &prev {
                    if pm.interact_stop.is_some() || pm.interrupt_anchor.is_some() || pm.bc_anchor.is_some() {
                        return Err(CompileError::DanglingPause { item: idx });
                    }
                }
                pending_pause = Some((idx, p.ms));
                continue;
            }
            ScriptItem::Turn(t) => t,
        };
        let speaker = r.speaker_index(&turn.speaker)?;
        if let Some(required) = must_speak.take() {
            if required != speaker || turn.prefix.is_some() {
                return Err(contradiction(idx, "the speaker who ceded must take the next turn"));
            }
        }
        let other_prev = prev.clone().filter(|p| p.speaker != speaker);
        let is_plain = turn.prefix.is_none();
        if pending_pause.is_some() && (!is_plain || must_continue.is_some()) {
            return Err(CompileError::DanglingPause {
                item: pending_pause.map_or(idx, |p| p.0),
            });
        }

        let marks = match turn.prefix {
            Some(Prefix::BargeIn) => {
                let holder = other_prev
                    .as_ref()
                    .ok_or(CompileError::BargeInWithoutPause { turn: idx })?;
                let pause = holder
                    .last_pause_start
                    .ok_or(CompileError::BargeInWithoutPause { turn: idx })?;
                let start = pause + model.barge_in_offset_ms;
                let holder_speaker = holder.speaker;
                let (marks, first) = r.render(speaker, turn, start);
                let first = first.ok_or_else(|| contradiction(idx, "barge-in renders no speech"))?;
                r.claims.push(Claim {
                    turn: idx,
                    kind: ClaimKind::BargeIn,
                    incomer: speaker,
                    holder: holder_speaker,
                    incoming: first,
                });
                r.floor.push(FloorTurn {
                    speaker,
                    start,
                    end: marks.spoken_end,
                });
                marks
            }
            Some(Prefix::OverlapsAssistant) => {
                let holder = other_prev
                    .as_ref()
                    .and_then(|p| p.interrupt_anchor.map(|a| (p.speaker, a)))
                    .ok_or(CompileError::Contradiction {
                        turn: idx,
                        reason: "[overlaps_assistant] needs the other speaker's [user_interrupt_starts]".into(),
                    })?;
                let (marks, first) = r.render(speaker, turn, holder.1);
                let first = first.ok_or_else(|| contradiction(idx, "interjection renders no speech"))?;
                let holder_end = r.speech_end(Some((holder.1, holder.1 + 1)), holder.0);
                if first.1 >= holder_end || marks.spoken_end >= holder_end {
                    return Err(contradiction(
                        idx,
                        "interjection outlasts the speech it overlaps; the floor holder must keep talking after it",
                    ));
                }
                r.claims.push(Claim {
                    turn: idx,
                    kind: ClaimKind::Fixed(EventKind::FailedInterruption),
                    incomer: speaker,
                    holder: holder.0,
                    incoming: first,
                });
                marks
            }
            Some(Prefix::Backchannel) => {
                let (holder, anchor, words_follow) = other_prev
                    .as_ref()
                    .and_then(|p| p.bc_anchor.map(|(a, w)| (p.speaker, a, w)))
                    .ok_or_else(|| contradiction(idx, "backchannel needs the other speaker's inline [BC] anchor"))?;
                let words = turn.word_count();
                if !(1..=3).contains(&words) {
                    return Err(contradiction(idx, "backchannel must be 1 to 3 words"));
                }
                let seg = Seg {
                    start: anchor,
                    end: anchor + model.backchannel_dur_ms,
                    words: turn
                        .pieces
                        .iter()
                        .filter_map(|p| match p {
                            Piece::Word(w) => Some((anchor, w.clone())),
                            Piece::Mark(_) => None,
                        })
                        .collect(),
                };
                let incoming = (seg.start, seg.end);
                r.push_segment(speaker, seg);
                r.claims.push(Claim {
                    turn: idx,
                    kind: ClaimKind::Fixed(EventKind::Backchannel),
                    incomer: speaker,
                    holder,
                    incoming,
                });
                if !words_follow {
                    must_continue = Some((holder, anchor));
                }
                // The anchor turn stays the reference for whatever follows.
                let mut kept = prev.clone().expect("anchor turn exists");
                kept.bc_anchor = None;
                prev = Some(kept);
                rendered_any = true;
                continue;
            }
            None => {
                if let Some((who, at)) = must_continue.take() {
                    if who != speaker {
                        return Err(contradiction(
                            idx,
                            "the speaker anchoring a backchannel must continue next",
                        ));
                    }
                    let (marks, _) = r.render(speaker, turn, at);
                    r.floor.push(FloorTurn {
                        speaker,
                        start: at,
                        end: marks.spoken_end,
                    });
                    marks
                } else if let Some((holder, anchor)) = other_prev
                    .as_ref()
                    .and_then(|p| p.bc_anchor.filter(|(_, follow)| *follow).map(|(a, _)| (p.speaker, a)))
                {
                    // A reply at a mid-turn anchor: the holder yields.
                    let words = turn.word_count() as u64;
                    if words * r.word_ms > model.backchannel_dur_ms
                        || turn.pieces.iter().any(|p| matches!(p, Piece::Mark(_)))
                    {
                        return Err(contradiction(
                            idx,
                            "a reply at a [BC] anchor must be plain and no longer than a backchannel",
                        ));
                    }
                    let (marks, first) = r.render(speaker, turn, anchor);
                    r.cut(holder, anchor + model.interrupt_reaction_ms);
                    r.claims.push(Claim {
                        turn: idx,
                        kind: ClaimKind::Fixed(EventKind::Backchannel),
                        incomer: speaker,
                        holder,
                        incoming: first.expect("words rendered"),
                    });
                    must_speak = Some(holder);
                    marks
                } else if let Some((holder, stop, holder_start)) = other_prev
                    .as_ref()
                    .and_then(|p| p.interact_stop.map(|s| (p.speaker, s, p.start)))
                {
                    let start = stop.saturating_sub(model.interrupt_reaction_ms);
                    if stop <= holder_start || start <= holder_start {
                        return Err(contradiction(idx, "interrupted turn is too short to be talked over"));
                    }
                    let (marks, first) = r.render(speaker, turn, start);
                    r.claims.push(Claim {
                        turn: idx,
                        kind: ClaimKind::Fixed(EventKind::SuccessfulInterruption),
                        incomer: speaker,
                        holder,
                        incoming: first.expect("words rendered"),
                    });
                    r.floor.push(FloorTurn {
                        speaker,
                        start,
                        end: marks.spoken_end,
                    });
                    marks
                } else {
                    if let Some(p) = &prev {
                        if p.interact_stop.is_some() || p.interrupt_anchor.is_some() || p.bc_anchor.is_some() {
                            return Err(contradiction(
                                idx,
                                "previous turn has an anchor this turn does not answer",
                            ));
                        }
                    }
                    let wait = pending_pause.take().map(|p| p.1);
                    let start = if rendered_any {
                        r.max_end() + wait.unwrap_or(model.inter_turn_gap_ms)
                    } else {
                        wait.unwrap_or(0)
                    };
                    if let Some(f) = r.floor_turn() {
                        if f.speaker != speaker {
                            let interval = Interval::try_from_ms(f.end, start)
                                .unwrap_or(Interval::new(f.end, f.end + 1).expect("non-empty"));
                            r.smooth.push(InteractionEvent {
                                kind: EventKind::SmoothTurnTransition,
                                interval,
                                initiator: r.speakers[speaker].clone(),
                                responder: r.speakers[f.speaker].clone(),
                            });
                        }
                    }
                    let (marks, _) = r.render(speaker, turn, start);
                    r.floor.push(FloorTurn {
                        speaker,
                        start,
                        end: marks.spoken_end,
                    });
                    marks
                }
            }
        };
        if let Some(p) = &prev {
            let answered = p.speaker != speaker || turn.prefix.is_some();
            if !answered && (p.interact_stop.is_some() || p.interrupt_anchor.is_some()) {
                return Err(contradiction(
                    idx,
                    "an interrupt anchor must be answered by the other speaker",
                ));
            }
        }
        // Consumed anchors are cleared so they are not answered twice.
        let mut marks = marks;
        if turn.prefix == Some(Prefix::OverlapsAssistant) {
            marks.interrupt_anchor = None;
        }
        prev = Some(marks);
        rendered_any = true;
    }

    if let Some((item, _)) = pending_pause {
        return Err(CompileError::DanglingPause { item });
    }
    if must_continue.is_some() || must_speak.is_some() {
        return Err(contradiction(
            script.items.len(),
            "script ends before the floor holder resumes",
        ));
    }
    if let Some(p) = &prev {
        if p.interact_stop.is_some() || p.interrupt_anchor.is_some() || p.bc_anchor.is_some() {
            return Err(contradiction(script.items.len(), "script ends on an unanswered anchor"));
        }
    }

    finish(script, r, ground_truth_error)
}

fn finish(
    script: &ScenarioScript,
    r: Renderer<'_>,
    ground_truth_error: Option<ErrorType>,
) -> Result<CompiledScenario, CompileError> {
    let mut speakers = r.speakers.clone();
    let mut segs = r.segs;
    for default in ["User", "Assistant"] {
        if speakers.len() < 2 && !speakers.iter().any(|s| s.as_str() == default) {
            speakers.push(SpeakerId::new(default));
            segs.push(Vec::new());
        }
    }
    let roles = RoleMap::infer(&speakers)?;

    let mut events = r.smooth;
    for claim in &r.claims {
        let holder_runs = runs_of(&segs[claim.holder]);
        let overlaps: Vec<(u64, u64)> = holder_runs
            .iter()
            .filter_map(|h| {
                let (s, e) = (h.0.max(claim.incoming.0), h.1.min(claim.incoming.1));
                (s < e).then_some((s, e))
            })
            .collect();
        let [(s, e)] = overlaps[..] else {
            return Err(contradiction(
                claim.turn,
                format!("rendered overlap is not a single interval ({} pieces)", overlaps.len()),
            ));
        };
        let kind = match claim.kind {
            ClaimKind::Fixed(k) => k,
            ClaimKind::BargeIn => {
                let incomer_end = runs_of(&segs[claim.incomer])
                    .into_iter()
                    .find(|run| run.0 <= s && s < run.1)
                    .map_or(0, |run| run.1);
                let holder_end = holder_runs
                    .iter()
                    .find(|run| run.0 <= s && s < run.1)
                    .map_or(0, |run| run.1);
                match incomer_end.cmp(&holder_end) {
                    std::cmp::Ordering::Greater => EventKind::SuccessfulInterruption,
                    std::cmp::Ordering::Less => EventKind::FailedInterruption,
                    std::cmp::Ordering::Equal => {
                        return Err(contradiction(
                            claim.turn,
                            "barge-in ends together with the speech it overlaps",
                        ))
                    }
                }
            }
        };
        events.push(InteractionEvent {
            kind,
            interval: Interval::new(s, e)?,
            initiator: speakers[claim.incomer].clone(),
            responder: speakers[claim.holder].clone(),
        });
    }
    events.sort_by_key(|e| (e.interval, e.kind));

    let mut tracks = Vec::with_capacity(2);
    for (speaker, track_segs) in speakers.iter().zip(segs) {
        let segments = track_segs
            .into_iter()
            .map(|s| {
                let text = s.words.into_iter().map(|(_, w)| w).collect::<Vec<_>>().join(" ");
                SpeechSegment::new(Interval::new(s.start, s.end)?, (!text.is_empty()).then_some(text))
            })
            .collect::<Result<Vec<_>, _>>()?;
        tracks.push(ChannelTrack::new(speaker.clone(), segments)?);
    }
    // User track first, as the document reader orders them.
    if tracks[0].speaker() != &roles.user {
        tracks.swap(0, 1);
    }
    let labels = ScenarioLabels {
        event_type: script.event_type.clone(),
        error_type: script.error_type.clone(),
        justified_interruption: script.justified_interruption,
    };
    let timeline = DialogueTimeline::new(tracks, roles, None, labels)?;
    let transcript_meta = DialogueDocument {
        dialogue_metadata: timeline_to_document(&timeline, &events),
    };
    Ok(CompiledScenario {
        timeline,
        ground_truth_events: events,
        ground_truth_error,
        transcript_meta,
    })
}
