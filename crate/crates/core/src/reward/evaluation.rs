//! Structured evaluator output: a semantic reasoning block, a fluency
//! reasoning block and a binary score block.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Response,
    Fluency,
    Score,
}

impl Block {
    fn names(self) -> &'static [&'static str] {
        match self {
            Block::Response => &["response think", "response_think"],
            Block::Fluency => &["fluency think", "fluency_think"],
            Block::Score => &["overall score", "overall_score", "score"],
        }
    }
}

/// Parsed evaluator output. Absent reasoning blocks are `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaluationOutput {
    pub cot_sem: Option<String>,
    pub cot_turn: Option<String>,
    pub score: Option<u8>,
    pub format_ok: bool,
}

struct Found {
    open_at: usize,
    close_end: usize,
    body: String,
}

const BLOCKS: [Block; 3] = [Block::Response, Block::Fluency, Block::Score];

/// First complete `<name>...</name>` pair of each block, scanning left to
/// right; a block body is opaque, so tags inside it are not blocks. Tags are
/// matched ASCII case-insensitively.
fn find_blocks(text: &str) -> [Option<Found>; 3] {
    // ASCII lowercasing keeps byte offsets aligned with `text`.
    let lower = text.to_ascii_lowercase();
    let mut found: [Option<Found>; 3] = [None, None, None];
    let mut pos = 0;
    while let Some(rel) = lower[pos..].find('<') {
        let at = pos + rel;
        pos = at + 1;
        let opened = BLOCKS.iter().enumerate().find_map(|(i, block)| {
            block
                .names()
                .iter()
                .find(|name| lower[at + 1..].starts_with(&format!("{name}>")))
                .map(|name| (i, *name))
        });
        let Some((i, name)) = opened else { continue };
        let body_start = at + name.len() + 2;
        let close = format!("</{name}>");
        let Some(close_rel) = lower[body_start..].find(&close) else {
            continue;
        };
        let body_end = body_start + close_rel;
        let close_end = body_end + close.len();
        if found[i].is_none() {
            found[i] = Some(Found {
                open_at: at,
                close_end,
                body: text[body_start..body_end].trim().to_string(),
            });
        }
        pos = close_end;
    }
    found
}

/// Never fails; malformed text gives `format_ok = false`.
pub fn parse_evaluation(text: &str) -> EvaluationOutput {
    let [response, fluency, score_block] = find_blocks(text);
    let score = score_block.as_ref().and_then(|b| match b.body.as_str() {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    });
    let format_ok = match (&response, &fluency, &score_block) {
        (Some(r), Some(f), Some(s)) => score.is_some() && r.close_end <= f.open_at && f.close_end <= s.open_at,
        _ => false,
    };
    EvaluationOutput {
        cot_sem: response.map(|b| b.body),
        cot_turn: fluency.map(|b| b.body),
        score,
        format_ok,
    }
}

fn push_block(out: &mut String, block: Block, body: &str, multiline: bool) {
    // A spelling whose closing tag does not occur in the body; the one the
    // body was parsed with always qualifies.
    let lower = body.to_ascii_lowercase();
    let name = block
        .names()
        .iter()
        .find(|n| !lower.contains(&format!("</{n}>")))
        .unwrap_or(&block.names()[0]);
    if multiline {
        out.push_str(&format!("<{name}>\n{body}\n</{name}>\n"));
    } else {
        out.push_str(&format!("<{name}>{body}</{name}>\n"));
    }
}

/// Canonical text for `eval`. Parsing the result gives `eval` back; an
/// output that was out of order is written with the score first so it stays
/// malformed.
pub fn render_evaluation(eval: &EvaluationOutput) -> String {
    let mut out = String::new();
    let complete = eval.cot_sem.is_some() && eval.cot_turn.is_some() && eval.score.is_some();
    let score_first = complete && !eval.format_ok;
    if score_first {
        push_block(&mut out, Block::Score, &eval.score.unwrap_or(0).to_string(), false);
    }
    if let Some(sem) = &eval.cot_sem {
        push_block(&mut out, Block::Response, sem, true);
    }
    if let Some(turn) = &eval.cot_turn {
        push_block(&mut out, Block::Fluency, turn, true);
    }
    if let (Some(s), false) = (eval.score, score_first) {
        push_block(&mut out, Block::Score, &s.to_string(), false);
    }
    out
}
