//! External JSON shape of timelines: a transcript of timestamped turns with
//! optional event and label metadata, optionally wrapped in
//! `"dialogue_metadata"`. Times are decimal seconds on the wire.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::TimelineError;
use crate::events::InteractionEvent;
use crate::timeline::{ChannelTrack, DialogueTimeline, Interval, RoleMap, ScenarioLabels, SpeakerId, SpeechSegment};

/// Parses a non-negative decimal-second string into ms, rounding half up.
pub fn parse_seconds(raw: &str) -> Result<u64, TimelineError> {
    let bad = || TimelineError::BadTimestamp(raw.to_string());
    let s = raw.trim();
    let s = s.strip_suffix('s').unwrap_or(s);
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let whole: u64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let digits = frac.as_bytes();
    let mut ms = 0u64;
    for i in 0..3 {
        ms = ms * 10 + digits.get(i).map_or(0, |d| u64::from(d - b'0'));
    }
    if digits.get(3).is_some_and(|d| *d >= b'5') {
        ms += 1;
    }
    whole.checked_mul(1000).and_then(|w| w.checked_add(ms)).ok_or_else(bad)
}

/// Milliseconds that travel as decimal seconds: read from a string or a
/// number, written as a number with three decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Seconds(pub u64);

impl Serialize for Seconds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format!("{}.{:03}", self.0 / 1000, self.0 % 1000))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Seconds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct SecondsVisitor;

        impl Visitor<'_> for SecondsVisitor {
            type Value = Seconds;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("non-negative seconds as a string or number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Seconds, E> {
                parse_seconds(v).map(Seconds).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Seconds, E> {
                v.checked_mul(1000)
                    .map(Seconds)
                    .ok_or_else(|| E::custom(TimelineError::BadTimestamp(v.to_string())))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Seconds, E> {
                match u64::try_from(v) {
                    Ok(u) => self.visit_u64(u),
                    Err(_) => Err(E::custom(TimelineError::BadTimestamp(v.to_string()))),
                }
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Seconds, E> {
                // Display gives the shortest decimal that round-trips, so 1.2
                // is read as "1.2" rather than 1.19999...
                if !v.is_finite() || v < 0.0 {
                    return Err(E::custom(TimelineError::BadTimestamp(v.to_string())));
                }
                self.visit_str(&v.to_string())
            }
        }

        d.deserialize_any(SecondsVisitor)
    }
}

/// Real number written with six fixed decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed6(pub f64);

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!("non-finite value {}", self.0)));
        }
        let mut text = format!("{:.6}", self.0);
        // No "-0.000000".
        if text.starts_with("-") && text[1..].bytes().all(|b| b == b'0' || b == b'.') {
            text.remove(0);
        }
        let raw = RawValue::from_string(text).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub speaker: String,
    pub start_time: Seconds,
    pub end_time: Seconds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// Event row. `event_type` is free text on input (datasets put error labels
/// here too); `participants` lists the floor holder first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEntry {
    pub event_type: String,
    pub start_time: Seconds,
    pub end_time: Seconds,
    #[serde(default)]
    pub participants: Vec<String>,
}

impl EventEntry {
    pub fn from_event(ev: &InteractionEvent) -> Self {
        EventEntry {
            event_type: ev.kind.as_str().to_string(),
            start_time: Seconds(ev.interval.start_ms()),
            end_time: Seconds(ev.interval.end_ms()),
            participants: vec![ev.responder.to_string(), ev.initiator.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleEntry {
    pub user: String,
    pub system: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanEntry {
    pub start_time: Seconds,
    pub end_time: Seconds,
}

/// The metadata object of a timeline document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineDocument {
    pub transcript: Vec<TranscriptEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interaction_events: Vec<EventEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<RoleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SpanEntry>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub justified_interruption: bool,
}

/// `{"dialogue_metadata": {...}}` wrapper used on output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DialogueDocument {
    pub dialogue_metadata: TimelineDocument,
}

/// Reads a timeline document, wrapped or bare.
pub fn parse_document(value: serde_json::Value) -> Result<TimelineDocument, TimelineError> {
    let inner = match value {
        serde_json::Value::Object(mut map) if map.contains_key("dialogue_metadata") => {
            map.remove("dialogue_metadata").unwrap_or_default()
        }
        other => other,
    };
    serde_json::from_value(inner).map_err(|e| TimelineError::Document(e.to_string()))
}

pub fn parse_document_str(text: &str) -> Result<TimelineDocument, TimelineError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TimelineError::Document(e.to_string()))?;
    parse_document(value)
}

/// Builds a validated timeline from a document.
pub fn validate_timeline(doc: &TimelineDocument) -> Result<DialogueTimeline, TimelineError> {
    let mut speakers: Vec<SpeakerId> = Vec::new();
    for e in &doc.transcript {
        let id = SpeakerId::new(e.speaker.clone());
        if !speakers.contains(&id) {
            speakers.push(id);
        }
    }
    if speakers.len() > 2 {
        return Err(TimelineError::SpeakerCount(speakers.len()));
    }
    let roles = match &doc.roles {
        Some(r) => RoleMap::new(r.user.clone(), r.system.clone()),
        None => RoleMap::infer(&speakers)?,
    };
    if let Some(stray) = speakers.iter().find(|s| roles.role_of(s).is_none()) {
        return Err(TimelineError::MissingRole(stray.to_string()));
    }
    let track_of = |who: &SpeakerId| -> Result<ChannelTrack, TimelineError> {
        let segments = doc
            .transcript
            .iter()
            .filter(|e| e.speaker == who.as_str())
            .map(|e| SpeechSegment::new(Interval::new(e.start_time.0, e.end_time.0)?, e.text.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        ChannelTrack::new(who.clone(), segments)
    };
    let tracks = vec![track_of(&roles.user)?, track_of(&roles.system)?];
    let span = doc
        .span
        .as_ref()
        .map(|s| Interval::new(s.start_time.0, s.end_time.0))
        .transpose()?;
    let labels = ScenarioLabels {
        event_type: doc.event_type.clone(),
        error_type: doc.error_type.clone(),
        justified_interruption: doc.justified_interruption,
    };
    DialogueTimeline::new(tracks, roles, span, labels)
}

/// Document for a timeline; segments are listed in start order. Roles and
/// span are written only when they differ from what a reader would infer.
pub fn timeline_to_document(timeline: &DialogueTimeline, events: &[InteractionEvent]) -> TimelineDocument {
    let mut transcript: Vec<(u64, usize, TranscriptEntry)> = Vec::new();
    for (ti, track) in timeline.tracks().iter().enumerate() {
        for seg in track.segments() {
            transcript.push((
                seg.interval.start_ms(),
                ti,
                TranscriptEntry {
                    speaker: track.speaker().to_string(),
                    start_time: Seconds(seg.interval.start_ms()),
                    end_time: Seconds(seg.interval.end_ms()),
                    text: seg.text.clone(),
                },
            ));
        }
    }
    transcript.sort_by_key(|(s, ti, _)| (*s, *ti));

    let speakers: Vec<&SpeakerId> = timeline.tracks().iter().map(|t| t.speaker()).collect();
    let roles = match RoleMap::infer(speakers) {
        Ok(inferred) if inferred == *timeline.roles() => None,
        _ => Some(RoleEntry {
            user: timeline.roles().user.to_string(),
            system: timeline.roles().system.to_string(),
        }),
    };
    let last_end = timeline
        .tracks()
        .iter()
        .flat_map(|t| t.segments())
        .map(|s| s.interval.end_ms())
        .max()
        .unwrap_or(0);
    let span = (timeline.span() != Interval::new(0, last_end + 1).expect("non-empty")).then(|| SpanEntry {
        start_time: Seconds(timeline.span().start_ms()),
        end_time: Seconds(timeline.span().end_ms()),
    });
    let labels = timeline.labels();
    TimelineDocument {
        transcript: transcript.into_iter().map(|(_, _, e)| e).collect(),
        interaction_events: events.iter().map(EventEntry::from_event).collect(),
        event_type: labels.event_type.clone(),
        error_type: labels.error_type.clone(),
        roles,
        span,
        justified_interruption: labels.justified_interruption,
    }
}
