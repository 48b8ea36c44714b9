//! Random timelines and brute-force oracles shared by the property and
//! acceptance tests.
#![allow(dead_code)]

use duplex_core::{ChannelTrack, DialogueTimeline, Interval, RoleMap, ScenarioLabels, SpeakerId, SpeechSegment};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const TEXTS: [Option<&str>; 7] = [
    Some("uh-huh"),
    Some("okay"),
    Some("yeah right"),
    Some("I see"),
    Some("let me explain the whole plan"),
    Some("no wait that is not what I said"),
    None,
];

fn random_track(rng: &mut ChaCha8Rng, speaker: &str, max_segments: usize) -> ChannelTrack {
    let n = rng.gen_range(0..=max_segments);
    let mut t: u64 = rng.gen_range(0..3000);
    let mut segments = Vec::with_capacity(n);
    for _ in 0..n {
        let len = rng.gen_range(1..=4000);
        if t + len > 60_000 {
            break;
        }
        let text = TEXTS[rng.gen_range(0..TEXTS.len())].map(str::to_string);
        segments.push(SpeechSegment::new(Interval::new(t, t + len).unwrap(), text).unwrap());
        // One segment in four touches the next.
        t += len
            + if rng.gen_ratio(1, 4) {
                0
            } else {
                rng.gen_range(1..=2500)
            };
    }
    ChannelTrack::new(SpeakerId::new(speaker), segments).unwrap()
}

/// Two tracks with at most 20 segments in total inside a span of at most
/// 60 s.
pub fn random_timeline(rng: &mut ChaCha8Rng) -> DialogueTimeline {
    let tracks = vec![random_track(rng, "User", 10), random_track(rng, "Assistant", 10)];
    let span = if rng.gen_ratio(1, 3) {
        let end = tracks
            .iter()
            .flat_map(|t| t.segments())
            .map(|s| s.interval.end_ms())
            .max()
            .unwrap_or(0);
        Some(Interval::new(0, end + rng.gen_range(1..=2000)).unwrap())
    } else {
        None
    };
    DialogueTimeline::new(
        tracks,
        RoleMap::new("User", "Assistant"),
        span,
        ScenarioLabels::default(),
    )
    .unwrap()
}

pub fn speaking(track: &ChannelTrack, t: u64) -> bool {
    track
        .segments()
        .iter()
        .any(|s| s.interval.start_ms() <= t && t < s.interval.end_ms())
}

/// Maximal runs of span milliseconds where `pred` holds.
pub fn grid_runs(span: Interval, pred: impl Fn(u64) -> bool) -> Vec<(u64, u64)> {
    let mut runs: Vec<(u64, u64)> = Vec::new();
    for t in span.start_ms()..span.end_ms() {
        if !pred(t) {
            continue;
        }
        match runs.last_mut() {
            Some(last) if last.1 == t => last.1 = t + 1,
            _ => runs.push((t, t + 1)),
        }
    }
    runs
}

pub fn grid_overlaps(tl: &DialogueTimeline) -> Vec<(u64, u64)> {
    let [a, b] = tl.tracks();
    grid_runs(tl.span(), |t| speaking(a, t) && speaking(b, t))
}

pub fn grid_mutual_silences(tl: &DialogueTimeline) -> Vec<(u64, u64)> {
    let [a, b] = tl.tracks();
    grid_runs(tl.span(), |t| !speaking(a, t) && !speaking(b, t))
}

pub fn pairs(intervals: &[Interval]) -> Vec<(u64, u64)> {
    intervals.iter().map(|i| (i.start_ms(), i.end_ms())).collect()
}

/// Per-class F1 from raw tp/fp/fn counts: 2tp / (2tp + fp + fn).
pub fn brute_force_metrics(preds: &[usize], labels: &[usize], classes: usize) -> (f64, Vec<f64>, f64) {
    let correct = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    let f1: Vec<f64> = (0..classes)
        .map(|c| {
            let mut tp = 0;
            let mut fp = 0;
            let mut fn_ = 0;
            for (&p, &l) in preds.iter().zip(labels) {
                match (p == c, l == c) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    _ => {}
                }
            }
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                (2 * tp) as f64 / denom as f64
            }
        })
        .collect();
    let macro_f1 = f1.iter().sum::<f64>() / classes as f64;
    (correct as f64 / preds.len() as f64, f1, macro_f1)
}
