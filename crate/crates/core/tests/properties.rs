mod common;

use common::{brute_force_metrics, grid_mutual_silences, grid_overlaps, pairs, random_timeline};
use duplex_core::reward::render_evaluation;
use duplex_core::{
    analyze, clipped_term, compile, compute_metrics, decompose, extract_events, group_advantages, judge_backchannel,
    mutual_silences, overlap_intervals, parse_document, parse_evaluation, parse_script, reward, silence_segments,
    timeline_to_document, validate_timeline, AnalysisConfig, DialogueTimeline, DurationModel, ErrorType, EventKind,
    Interval, RewardWeights, SpeakerId, SpeechSegment,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn timeline(seed: u64) -> DialogueTimeline {
    random_timeline(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn sorted_disjoint(ivs: &[Interval]) -> bool {
    ivs.windows(2).all(|w| w[0].end() < w[1].start())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_algebra_matches_grid(seed in any::<u64>()) {
        let tl = timeline(seed);
        prop_assert_eq!(pairs(&overlap_intervals(&tl)), grid_overlaps(&tl));
        prop_assert_eq!(pairs(&mutual_silences(&tl)), grid_mutual_silences(&tl));
    }

    #[test]
    fn silences_partition_the_span(seed in any::<u64>()) {
        let tl = timeline(seed);
        for track in tl.tracks() {
            let mut pieces: Vec<(u64, u64)> = pairs(&silence_segments(track, tl.span()));
            pieces.extend(track.segments().iter().map(|s| (s.interval.start_ms(), s.interval.end_ms())));
            pieces.sort();
            let mut cursor = tl.span().start_ms();
            for (s, e) in pieces {
                prop_assert_eq!(s, cursor);
                cursor = e;
            }
            prop_assert_eq!(cursor, tl.span().end_ms());
        }
    }

    #[test]
    fn overlaps_and_silences_are_disjoint_and_sorted(seed in any::<u64>()) {
        let tl = timeline(seed);
        let ov = overlap_intervals(&tl);
        let ms = mutual_silences(&tl);
        prop_assert!(sorted_disjoint(&ov));
        prop_assert!(sorted_disjoint(&ms));
        prop_assert!(ov.iter().all(|o| ms.iter().all(|m| !o.intersects(m))));
    }

    #[test]
    fn translation_equivariance(seed in any::<u64>(), delta in 1u64..100_000) {
        let tl = timeline(seed);
        let moved = tl.shifted(delta);
        let shift = |v: Vec<Interval>| v.into_iter().map(|i| i.shifted(delta)).collect::<Vec<_>>();
        prop_assert_eq!(overlap_intervals(&moved), shift(overlap_intervals(&tl)));
        prop_assert_eq!(mutual_silences(&moved), shift(mutual_silences(&tl)));

        let cfg = AnalysisConfig::default();
        let a = analyze(&tl, &cfg).unwrap();
        let b = analyze(&moved, &cfg).unwrap();
        prop_assert_eq!(b.decomposition.turns.len(), a.decomposition.turns.len());
        for (x, y) in a.decomposition.turns.iter().zip(&b.decomposition.turns) {
            prop_assert_eq!(y.interval, x.interval.shifted(delta));
        }
        prop_assert_eq!(b.events.len(), a.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            prop_assert_eq!(y.kind, x.kind);
            prop_assert_eq!(y.interval, x.interval.shifted(delta));
        }
        prop_assert_eq!(b.verdict.score, a.verdict.score);
        prop_assert_eq!(b.fine_grained_label, a.fine_grained_label);
    }

    #[test]
    fn speaker_swap_symmetry(seed in any::<u64>()) {
        let tl = timeline(seed);
        let swapped = tl.with_swapped_tracks();
        prop_assert_eq!(overlap_intervals(&swapped), overlap_intervals(&tl));
        prop_assert_eq!(mutual_silences(&swapped), mutual_silences(&tl));
    }

    // Renames keep the id order, since floor-holder ties with no previous
    // turn fall back to the lexicographically smaller id.
    #[test]
    fn relabeling_equivariance(seed in any::<u64>()) {
        let tl = timeline(seed);
        let rename = |s: &SpeakerId| SpeakerId::new(format!("{}-renamed", s.as_str().to_lowercase()));
        let cfg = AnalysisConfig::default();
        let a = decompose(&tl, &cfg);
        let b = decompose(&tl.relabeled(rename), &cfg);
        prop_assert_eq!(a.turns.len(), b.turns.len());
        for (x, y) in a.turns.iter().zip(&b.turns) {
            prop_assert_eq!(&y.speaker, &rename(&x.speaker));
            prop_assert_eq!(y.interval, x.interval);
            prop_assert_eq!(&y.segment_indices, &x.segment_indices);
        }
        prop_assert_eq!(a.overlaps.len(), b.overlaps.len());
        for (x, y) in a.overlaps.iter().zip(&b.overlaps) {
            prop_assert_eq!(y.interval, x.interval);
            prop_assert_eq!(&y.floor_holder, &rename(&x.floor_holder));
        }
        prop_assert_eq!(pairs(&a.gaps.iter().map(|g| g.interval).collect::<Vec<_>>()),
                        pairs(&b.gaps.iter().map(|g| g.interval).collect::<Vec<_>>()));
    }

    #[test]
    fn decomposition_is_consistent(seed in any::<u64>()) {
        let tl = timeline(seed);
        let cfg = AnalysisConfig::default();
        let d = decompose(&tl, &cfg);
        prop_assert_eq!(&d, &decompose(&tl, &cfg));
        for track in tl.tracks() {
            for i in 0..track.segments().len() {
                let owners = d
                    .turns
                    .iter()
                    .filter(|t| &t.speaker == track.speaker() && t.segment_indices.contains(&i))
                    .count();
                prop_assert_eq!(owners, 1, "segment {} of {}", i, track.speaker());
            }
        }
        let speech: Vec<Interval> = tl.tracks().iter().flat_map(|t| t.speech_runs()).collect();
        for g in &d.gaps {
            prop_assert!(speech.iter().all(|s| !s.intersects(&g.interval)));
        }
        for o in &d.overlaps {
            prop_assert!(d.turns[o.holder_turn].interval.covers(&o.interval));
            prop_assert!(d.turns[o.incomer_turn].interval.covers(&o.interval));
        }
    }

    #[test]
    fn one_event_per_overlap(seed in any::<u64>()) {
        let tl = timeline(seed);
        let cfg = AnalysisConfig::default();
        let d = decompose(&tl, &cfg);
        let events = extract_events(&tl, &cfg);
        let overlap_kinds = [EventKind::SuccessfulInterruption, EventKind::FailedInterruption, EventKind::Backchannel];
        let counted = d.overlaps.iter().filter(|o| o.interval.duration_ms() >= cfg.min_overlap_ms).count();
        prop_assert_eq!(events.iter().filter(|e| overlap_kinds.contains(&e.kind)).count(), counted);
        for o in d.overlaps.iter().filter(|o| o.interval.duration_ms() >= cfg.min_overlap_ms) {
            let n = events.iter().filter(|e| e.interval == o.interval && overlap_kinds.contains(&e.kind)).count();
            prop_assert_eq!(n, 1);
        }
    }

    #[test]
    fn verdict_invariants(seed in any::<u64>()) {
        let tl = timeline(seed);
        let report = analyze(&tl, &AnalysisConfig::default()).unwrap();
        let v = &report.verdict;
        prop_assert!(v.score <= 1);
        prop_assert_eq!(v.score == 1, v.semantic_findings.is_empty() && v.timing_findings.is_empty());
        for f in &v.timing_findings {
            prop_assert!(f.evidence.intersects(&tl.span()));
        }
    }

    #[test]
    fn delayed_threshold_monotone(seed in any::<u64>(), lo in 1u64..6000, extra in 0u64..6000) {
        let tl = timeline(seed);
        let count = |threshold: u64| {
            let cfg = AnalysisConfig { delayed_gap_ms: threshold, ..AnalysisConfig::default() };
            analyze(&tl, &cfg)
                .unwrap()
                .verdict
                .timing_findings
                .iter()
                .filter(|f| f.error_type == ErrorType::DelayedTurnTransition)
                .count()
        };
        prop_assert!(count(lo + extra) <= count(lo));
    }

    #[test]
    fn shorter_backchannel_stays_backchannel(len in 1u64..3000, cut in 1u64..3000, pick in 0usize..4) {
        let text = ["uh-huh", "okay", "mm-hmm right", "I totally disagree with that"][pick];
        let cfg = AnalysisConfig::default();
        let seg = |l: u64| SpeechSegment::new(Interval::new(1000, 1000 + l).unwrap(), Some(text.to_string())).unwrap();
        if judge_backchannel(&seg(len), &cfg).is_backchannel {
            let shorter = len.saturating_sub(cut).max(1);
            prop_assert!(judge_backchannel(&seg(shorter), &cfg).is_backchannel);
        }
    }
}

fn evaluation_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("<response think>".to_string()),
        Just("</response think>".to_string()),
        Just("<Fluency_Think>".to_string()),
        Just("</fluency_think>".to_string()),
        Just("<fluency think>".to_string()),
        Just("</fluency think>".to_string()),
        Just("<overall score>".to_string()),
        Just("</overall score>".to_string()),
        Just("<score>".to_string()),
        Just("</score>".to_string()),
        Just("0".to_string()),
        Just("1".to_string()),
        Just("\n".to_string()),
        "[a-z .]{0,12}",
    ];
    prop::collection::vec(piece, 0..16).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn evaluation_parse_is_idempotent(text in evaluation_text()) {
        let once = parse_evaluation(&text);
        let again = parse_evaluation(&render_evaluation(&once));
        prop_assert_eq!(again, once);
    }

    #[test]
    fn reward_bounded_and_monotone(text in evaluation_text(), fmt in 0.0f64..=1.0) {
        let w = RewardWeights::new(fmt, 1.0 - fmt).unwrap();
        for gt in [0, 1] {
            let r = reward(&text, gt, &w).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
        }
        if let Some(score) = parse_evaluation(&text).score {
            let matching = reward(&text, i64::from(score), &w).unwrap();
            let other = reward(&text, 1 - i64::from(score), &w).unwrap();
            prop_assert!(matching >= other);
        }
    }

    #[test]
    fn advantages_are_standardized(rewards in prop::collection::vec(-10.0f64..10.0, 2..9)) {
        let a = group_advantages(&rewards).unwrap();
        let n = rewards.len() as f64;
        if a.std > 0.0 {
            let mean = a.advantages.iter().sum::<f64>() / n;
            let std = (a.advantages.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((std - 1.0).abs() < 1e-9);
        } else {
            prop_assert!(a.advantages.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn clipped_term_bounds(w in 0.01f64..5.0, adv in -5.0f64..5.0, eps in 0.01f64..0.99) {
        let t = clipped_term(w, adv, eps).unwrap();
        prop_assert!(t <= w * adv);
        if (1.0 - eps..=1.0 + eps).contains(&w) {
            prop_assert_eq!(t, w * adv);
        }
    }

    #[test]
    fn metrics_match_brute_force(
        classes in 1usize..=4,
        pairs_in in prop::collection::vec((0usize..4, 0usize..4), 1..=50),
    ) {
        let preds: Vec<usize> = pairs_in.iter().map(|p| p.0 % classes).collect();
        let labels: Vec<usize> = pairs_in.iter().map(|p| p.1 % classes).collect();
        let class_set: Vec<usize> = (0..classes).collect();
        let m = compute_metrics(&preds, &labels, &class_set).unwrap();
        let (acc, f1, macro_f1) = brute_force_metrics(&preds, &labels, classes);
        prop_assert!((m.accuracy - acc).abs() < 1e-12);
        prop_assert!((m.macro_f1 - macro_f1).abs() < 1e-12);
        for (c, expected) in f1.iter().enumerate() {
            prop_assert!((m.per_class[c].f1 - expected).abs() < 1e-12);
        }
        for (c, row) in m.confusion.iter().enumerate() {
            prop_assert_eq!(row.iter().sum::<u64>(), m.per_class[c].support);
        }
        let trace: u64 = (0..classes).map(|c| m.confusion[c][c]).sum();
        prop_assert!((m.accuracy - trace as f64 / preds.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn metrics_permutation_invariant(
        pairs_in in prop::collection::vec((0usize..3, 0usize..3), 1..=30).prop_shuffle(),
    ) {
        let preds: Vec<usize> = pairs_in.iter().map(|p| p.0).collect();
        let labels: Vec<usize> = pairs_in.iter().map(|p| p.1).collect();
        let mut sorted = pairs_in.clone();
        sorted.sort();
        let sp: Vec<usize> = sorted.iter().map(|p| p.0).collect();
        let sl: Vec<usize> = sorted.iter().map(|p| p.1).collect();
        let a = compute_metrics(&preds, &labels, &[0, 1, 2]).unwrap();
        let b = compute_metrics(&sp, &sl, &[0, 1, 2]).unwrap();
        prop_assert_eq!(a.confusion, b.confusion);
        prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-15);
    }

    #[test]
    fn compiled_pause_is_the_gap(short in 1u64..8000, extra in 1u64..8000) {
        let gap_of = |ms: u64| {
            let script = parse_script(&json!({"dialogue": [
                {"speaker": "User", "text": "Where is the nearest bakery?"},
                {"pause": format!("{}.{:03}", ms / 1000, ms % 1000)},
                {"speaker": "Assistant", "text": "Two blocks north on Elm Street."}
            ]}))
            .unwrap();
            let c = compile(&script, &DurationModel::default()).unwrap();
            let d = decompose(&c.timeline, &AnalysisConfig::default());
            assert_eq!(d.gaps.len(), 1);
            d.gaps[0].interval.duration_ms()
        };
        let (a, b) = (gap_of(short), gap_of(short + extra));
        prop_assert_eq!(a, short);
        prop_assert!(b > a);
    }

    #[test]
    fn latent_tail_is_not_rendered(pre in 1usize..12, tail in 1usize..12) {
        let words = |n: usize, w: &str| vec![w; n].join(" ");
        let text = format!("{} [INTERACT] {}", words(pre, "alpha"), words(tail, "omega"));
        let script = parse_script(&json!({"dialogue": [
            {"speaker": "Assistant", "text": text},
            {"speaker": "User", "text": "hold on a second please"}
        ]}))
        .unwrap();
        let model = DurationModel::default();
        let c = compile(&script, &model).unwrap();
        let assistant = c.timeline.track(&SpeakerId::new("Assistant")).unwrap();
        let rendered: u64 = assistant.segments().iter().map(|s| s.interval.duration_ms()).sum();
        prop_assert_eq!(rendered, pre as u64 * model.word_ms());
        prop_assert!(assistant.segments().iter().all(|s| !s.text.as_deref().unwrap_or("").contains("omega")));
    }
}

#[test]
fn compiled_corpus_documents_validate() {
    let corpus = duplex_core::generate_corpus(
        &duplex_core::CorpusMix::uniform(10, 99),
        &duplex_core::BuiltinTemplates::default(),
        &DurationModel::default(),
    )
    .unwrap();
    for s in &corpus {
        let tl = &s.scenario.timeline;
        let doc = timeline_to_document(tl, &s.scenario.ground_truth_events);
        let value = serde_json::to_value(&s.scenario.transcript_meta).unwrap();
        let reread = validate_timeline(&parse_document(value).unwrap()).unwrap();
        assert_eq!(&reread, tl, "{}", s.id);
        assert_eq!(validate_timeline(&doc).unwrap(), *tl);
    }
}
