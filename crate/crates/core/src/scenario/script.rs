//! Marker-annotated dialogue scripts.
//!
//! A script is a `"dialogue"` array of `{"speaker", "text"}` turns and
//! `{"pause": "4.0s"}` directives. Turn texts may carry bracketed markers:
//! `[PAUSE]`, `[INTERACT]` (alias `[interrupt]`), `[BC]`, `[barge_in]`,
//! `[user_interrupt_starts]` and `[overlaps_assistant]`, in any letter case.

use serde_json::Value;

use crate::error::ScriptError;
use crate::schema::parse_seconds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marker {
    Pause,
    Interact,
    Backchannel,
    BargeIn,
    UserInterruptStarts,
    OverlapsAssistant,
}

impl Marker {
    fn from_name(name: &str) -> Option<Marker> {
        Some(match name.trim().to_ascii_lowercase().as_str() {
            "pause" => Marker::Pause,
            "interact" | "interrupt" => Marker::Interact,
            "bc" => Marker::Backchannel,
            "barge_in" => Marker::BargeIn,
            "user_interrupt_starts" => Marker::UserInterruptStarts,
            "overlaps_assistant" => Marker::OverlapsAssistant,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Marker::Pause => "PAUSE",
            Marker::Interact => "INTERACT",
            Marker::Backchannel => "BC",
            Marker::BargeIn => "barge_in",
            Marker::UserInterruptStarts => "user_interrupt_starts",
            Marker::OverlapsAssistant => "overlaps_assistant",
        }
    }
}

/// Marker occurrence with its byte offset in the turn text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkerToken {
    pub marker: Marker,
    pub offset: usize,
}

/// Turn-initial marker that positions the whole turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefix {
    Backchannel,
    BargeIn,
    OverlapsAssistant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Word(String),
    Mark(Marker),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpokenTurn {
    pub speaker: String,
    pub text: String,
    pub prefix: Option<Prefix>,
    /// Words and inline markers in order; punctuation-only tokens dropped.
    pub pieces: Vec<Piece>,
    pub markers: Vec<MarkerToken>,
}

impl SpokenTurn {
    pub fn has_mark(&self, m: Marker) -> bool {
        self.pieces.contains(&Piece::Mark(m))
    }

    pub fn word_count(&self) -> usize {
        self.pieces.iter().filter(|p| matches!(p, Piece::Word(_))).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauseDirective {
    pub ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptItem {
    Turn(SpokenTurn),
    Pause(PauseDirective),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioScript {
    pub items: Vec<ScriptItem>,
    pub event_type: Option<String>,
    pub error_type: Option<String>,
    pub justified_interruption: bool,
}

type Tokens = (Option<Prefix>, Vec<Piece>, Vec<MarkerToken>);

fn tokenize(turn: usize, text: &str) -> Result<Tokens, ScriptError> {
    let mut pieces = Vec::new();
    let mut markers = Vec::new();
    let mut prefix = None;
    let push_words = |chunk: &str, pieces: &mut Vec<Piece>| {
        pieces.extend(
            chunk
                .split_whitespace()
                .filter(|w| w.chars().any(char::is_alphanumeric))
                .map(|w| Piece::Word(w.to_string())),
        );
    };
    let mut rest = 0;
    while let Some(rel) = text[rest..].find('[') {
        let open = rest + rel;
        push_words(&text[rest..open], &mut pieces);
        let close = text[open..]
            .find(']')
            .map(|c| open + c)
            .ok_or(ScriptError::UnterminatedMarker { turn, offset: open })?;
        let name = &text[open + 1..close];
        let marker = Marker::from_name(name).ok_or_else(|| ScriptError::UnknownMarker {
            turn,
            marker: name.to_string(),
        })?;
        markers.push(MarkerToken { marker, offset: open });
        let at_start = pieces.is_empty() && markers.len() == 1;
        match marker {
            Marker::Backchannel if at_start => prefix = Some(Prefix::Backchannel),
            Marker::BargeIn if at_start => prefix = Some(Prefix::BargeIn),
            Marker::OverlapsAssistant if at_start => prefix = Some(Prefix::OverlapsAssistant),
            Marker::BargeIn | Marker::OverlapsAssistant => {
                return Err(ScriptError::MisplacedPrefix {
                    turn,
                    marker: marker.name().to_string(),
                })
            }
            _ => pieces.push(Piece::Mark(marker)),
        }
        rest = close + 1;
    }
    push_words(&text[rest..], &mut pieces);
    Ok((prefix, pieces, markers))
}

fn parse_turn(index: usize, speaker: &str, text: &str) -> Result<SpokenTurn, ScriptError> {
    if speaker.trim().is_empty() {
        return Err(ScriptError::Document(format!("item {index}: empty speaker")));
    }
    let (prefix, pieces, markers) = tokenize(index, text)?;
    let turn = SpokenTurn {
        speaker: speaker.to_string(),
        text: text.to_string(),
        prefix,
        pieces,
        markers,
    };
    if turn.word_count() == 0 {
        return Err(ScriptError::EmptyTurn { turn: index });
    }
    let interacts: Vec<usize> = turn
        .pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| **p == Piece::Mark(Marker::Interact))
        .map(|(i, _)| i)
        .collect();
    if interacts.len() > 1 {
        return Err(ScriptError::DuplicateInteract { turn: index });
    }
    if let Some(&at) = interacts.first() {
        if !turn.pieces[at..].iter().any(|p| matches!(p, Piece::Word(_))) {
            return Err(ScriptError::MissingLatentTail { turn: index });
        }
    }
    Ok(turn)
}

fn optional_string(doc: &serde_json::Map<String, Value>, key: &str) -> Result<Option<String>, ScriptError> {
    match doc.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.trim().to_string())),
        Some(other) => Err(ScriptError::Document(format!("{key} must be a string, got {other}"))),
    }
}

/// Parses and checks a script document.
pub fn parse_script(doc: &Value) -> Result<ScenarioScript, ScriptError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| ScriptError::Document("script must be a JSON object".into()))?;
    let dialogue = obj
        .get("dialogue")
        .and_then(Value::as_array)
        .ok_or_else(|| ScriptError::Document("missing \"dialogue\" array".into()))?;
    let mut items = Vec::with_capacity(dialogue.len());
    for (i, raw) in dialogue.iter().enumerate() {
        let entry = raw
            .as_object()
            .ok_or_else(|| ScriptError::Document(format!("item {i} is not an object")))?;
        if let Some(p) = entry.get("pause") {
            let value = match p {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                other => other.to_string(),
            };
            let ms = parse_seconds(&value).map_err(|_| ScriptError::BadPause { item: i, value })?;
            items.push(ScriptItem::Pause(PauseDirective { ms }));
            continue;
        }
        let (Some(Value::String(speaker)), Some(Value::String(text))) = (entry.get("speaker"), entry.get("text"))
        else {
            return Err(ScriptError::Document(format!(
                "item {i} needs string \"speaker\" and \"text\", or \"pause\""
            )));
        };
        let turn = parse_turn(i, speaker, text)?;
        let previous = match items.last() {
            Some(ScriptItem::Turn(t)) => Some(t),
            _ => None,
        };
        match turn.prefix {
            Some(Prefix::Backchannel) if !previous.is_some_and(|t| t.has_mark(Marker::Backchannel)) => {
                return Err(ScriptError::OrphanBackchannel { turn: i })
            }
            Some(Prefix::OverlapsAssistant) if !previous.is_some_and(|t| t.has_mark(Marker::UserInterruptStarts)) => {
                return Err(ScriptError::OrphanOverlap { turn: i })
            }
            _ => {}
        }
        items.push(ScriptItem::Turn(turn));
    }
    let justified_interruption = match obj.get("justified_interruption") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(other) => {
            return Err(ScriptError::Document(format!(
                "justified_interruption must be a boolean, got {other}"
            )))
        }
    };
    Ok(ScenarioScript {
        items,
        event_type: optional_string(obj, "event_type")?,
        error_type: optional_string(obj, "error_type")?,
        justified_interruption,
    })
}

pub fn parse_script_str(text: &str) -> Result<ScenarioScript, ScriptError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ScriptError::Document(e.to_string()))?;
    parse_script(&doc)
}
