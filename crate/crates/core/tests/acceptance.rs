//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_force_metrics, grid_mutual_silences, grid_overlaps, pairs, random_timeline};
use duplex_core::scenario::CorpusRecord;
use duplex_core::{
    analyze, clipped_term, compile, compute_metrics, generate_corpus, generate_corpus_parallel, group_advantages,
    mutual_silences, overlap_intervals, parse_document_str, parse_script, reward, validate_timeline, AnalysisConfig,
    BuiltinTemplates, CorpusMix, DurationModel, ErrorType, FineLabel, RewardWeights, ScenarioClass,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const APPENDIX_MAX_RUNTIME: Duration = Duration::from_secs(1);
const CORPUS_MIN_SCENARIOS: usize = 500;
const CORPUS_MAX_RUNTIME: Duration = Duration::from_secs(10);
const GRPO_GROUPS: usize = 1000;
const GRPO_TOL: f64 = 1e-9;
const CLIP_EPSILON: f64 = 0.2;
const METRICS_INSTANCES: usize = 200;
const METRICS_TOL: f64 = 1e-12;
const INTERVAL_TIMELINES: usize = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn appendix_sample() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/appendix_f.json");
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let doc = parse_document_str(&text).map_err(|e| e.to_string())?;
    let tl = validate_timeline(&doc).map_err(|e| e.to_string())?;
    let report = analyze(&tl, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();

    let overlaps = pairs(
        &report
            .decomposition
            .overlaps
            .iter()
            .map(|o| o.interval)
            .collect::<Vec<_>>(),
    );
    check(overlaps == vec![(6100, 8500)], format!("overlaps {overlaps:?}"))?;
    let findings: Vec<ErrorType> = report
        .verdict
        .timing_findings
        .iter()
        .chain(&report.verdict.semantic_findings)
        .map(|f| f.error_type)
        .collect();
    check(
        findings == vec![ErrorType::InappropriateBargeIn],
        format!("findings {findings:?}"),
    )?;
    check(report.verdict.score == 0, format!("score {}", report.verdict.score))?;
    check(
        report.fine_grained_label == FineLabel::QuickE,
        format!("label {}", report.fine_grained_label),
    )?;
    check(elapsed < APPENDIX_MAX_RUNTIME, format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "overlap [6.100, 8.500] s, Inappropriate_Barge_in, score 0, QuickE in {elapsed:?}"
    ))
}

fn round_trip_corpus() -> Outcome {
    let per_class = CORPUS_MIN_SCENARIOS.div_ceil(ScenarioClass::ALL.len());
    let started = Instant::now();
    let corpus = generate_corpus(
        &CorpusMix::uniform(per_class, 20251016),
        &BuiltinTemplates::default(),
        &DurationModel::default(),
    )
    .map_err(|e| e.to_string())?;
    let cfg = AnalysisConfig::default();
    let mut disagreements = Vec::new();
    for s in &corpus {
        let report = analyze(&s.scenario.timeline, &cfg).map_err(|e| e.to_string())?;
        let kinds: Vec<_> = report.events.iter().map(|e| e.kind).collect();
        let truth: Vec<_> = s.scenario.ground_truth_events.iter().map(|e| e.kind).collect();
        let label_ok = match s.scenario.ground_truth_error {
            None => report.fine_grained_label == FineLabel::CR,
            Some(e) => report.fine_grained_label == FineLabel::from(e.coarse_class()),
        };
        if kinds != truth || report.primary_error() != s.scenario.ground_truth_error || !label_ok {
            disagreements.push(s.id.clone());
        }
    }
    let elapsed = started.elapsed();
    let classes: std::collections::BTreeSet<_> = corpus.iter().map(|s| s.class).collect();
    check(
        corpus.len() >= CORPUS_MIN_SCENARIOS,
        format!("only {} scenarios", corpus.len()),
    )?;
    check(
        classes.len() == ScenarioClass::ALL.len(),
        format!("classes {classes:?}"),
    )?;
    check(
        disagreements.is_empty(),
        format!(
            "{} of {} disagree, e.g. {:?}",
            disagreements.len(),
            corpus.len(),
            &disagreements[..disagreements.len().min(5)]
        ),
    )?;
    check(elapsed < CORPUS_MAX_RUNTIME, format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "{} scenarios, 8 classes, 100% agreement in {elapsed:?}",
        corpus.len()
    ))
}

fn delayed_gap_boundary() -> Outcome {
    let findings = |pause: &str| -> Result<(u64, Vec<ErrorType>), String> {
        let script = parse_script(&json!({"dialogue": [
            {"speaker": "User", "text": "Could you check my account balance?"},
            {"pause": pause},
            {"speaker": "Assistant", "text": "Your balance is two hundred dollars."}
        ]}))
        .map_err(|e| e.to_string())?;
        let c = compile(&script, &DurationModel::default()).map_err(|e| e.to_string())?;
        let report = analyze(&c.timeline, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
        let gap = report
            .decomposition
            .gaps
            .first()
            .map_or(0, |g| g.interval.duration_ms());
        Ok((
            gap,
            report.verdict.timing_findings.iter().map(|f| f.error_type).collect(),
        ))
    };
    let below = findings("2.999s")?;
    let above = findings("3.001s")?;
    check(below == (2999, vec![]), format!("2999 ms gave {below:?}"))?;
    check(
        above == (3001, vec![ErrorType::DelayedTurnTransition]),
        format!("3001 ms gave {above:?}"),
    )?;
    Ok("2999 ms clean, 3001 ms Delayed_Turn_Transition".into())
}

fn grpo_arithmetic() -> Outcome {
    let a = group_advantages(&[1.0, 1.0, 0.0, 0.0]).map_err(|e| e.to_string())?;
    check(
        a.advantages == vec![1.0, 1.0, -1.0, -1.0],
        format!("{:?}", a.advantages),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut worst_mean: f64 = 0.0;
    let mut worst_std: f64 = 0.0;
    let mut groups = 0;
    while groups < GRPO_GROUPS {
        let k = rng.gen_range(2..=8);
        let rewards: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let adv = group_advantages(&rewards).map_err(|e| e.to_string())?;
        if adv.std == 0.0 {
            continue;
        }
        let n = k as f64;
        let mean = adv.advantages.iter().sum::<f64>() / n;
        let std = (adv.advantages.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        worst_mean = worst_mean.max(mean.abs());
        worst_std = worst_std.max((std - 1.0).abs());
        groups += 1;
    }
    check(worst_mean < GRPO_TOL, format!("|mean| up to {worst_mean:e}"))?;
    check(worst_std < GRPO_TOL, format!("|std - 1| up to {worst_std:e}"))?;

    let mut clip_checks = 0;
    for i in 0..=400 {
        let w = 0.8 + 0.4 * f64::from(i) / 400.0;
        let w = w.clamp(1.0 - CLIP_EPSILON, 1.0 + CLIP_EPSILON);
        let adv = rng.gen_range(-3.0..3.0);
        let t = clipped_term(w, adv, CLIP_EPSILON).map_err(|e| e.to_string())?;
        check(
            t == w * adv,
            format!("clipped_term({w}, {adv}) = {t}, w*A = {}", w * adv),
        )?;
        clip_checks += 1;
    }
    Ok(format!(
        "exact [1,1,-1,-1]; {groups} groups |mean| <= {worst_mean:.1e}, |std-1| <= {worst_std:.1e}; {clip_checks} clip identities"
    ))
}

fn reward_values() -> Outcome {
    let w = RewardWeights::new(0.5, 0.5).map_err(|e| e.to_string())?;
    let full =
        "<response think>ok</response think>\n<fluency think>ok</fluency think>\n<overall score>1</overall score>";
    let fixtures = [
        ("malformed", "no blocks here", 0.0),
        ("half-correct", full, 0.5),
        ("fully correct", full, 1.0),
    ];
    let gts = [1, 0, 1];
    for ((name, text, expected), gt) in fixtures.iter().zip(gts) {
        let r = reward(text, gt, &w).map_err(|e| e.to_string())?;
        check(r == *expected, format!("{name}: {r}"))?;
    }
    // Every combination of block presence, order and score.
    let blocks = ["<response think>a</response think>", "<fluency think>b</fluency think>"];
    let mut seen = std::collections::BTreeSet::new();
    for mask in 0..4 {
        for score in [
            "",
            "<overall score>0</overall score>",
            "<overall score>1</overall score>",
            "<score>x</score>",
        ] {
            for score_first in [false, true] {
                let body: String = (0..2).filter(|i| mask & (1 << i) != 0).map(|i| blocks[i]).collect();
                let text = if score_first {
                    format!("{score}{body}")
                } else {
                    format!("{body}{score}")
                };
                for gt in [0, 1] {
                    let r = reward(&text, gt, &w).map_err(|e| e.to_string())?;
                    seen.insert((r * 2.0) as u8);
                    check([0.0, 0.5, 1.0].contains(&r), format!("reward {r} for {text:?}"))?;
                }
            }
        }
    }
    check(seen.len() == 3, format!("attained {seen:?}"))?;
    Ok("attained set {0, 0.5, 1.0}; fixtures 0 / 0.5 / 1.0".into())
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut worst: f64 = 0.0;
    for _ in 0..METRICS_INSTANCES {
        let classes = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=50);
        let preds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..classes)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..classes)).collect();
        let class_set: Vec<usize> = (0..classes).collect();
        let m = compute_metrics(&preds, &labels, &class_set).map_err(|e| e.to_string())?;
        let (acc, f1, macro_f1) = brute_force_metrics(&preds, &labels, classes);
        worst = worst
            .max((m.accuracy - acc).abs())
            .max((m.macro_f1 - macro_f1).abs())
            .max(
                m.per_class
                    .iter()
                    .zip(&f1)
                    .map(|(s, f)| (s.f1 - f).abs())
                    .fold(0.0, f64::max),
            );
    }
    check(worst <= METRICS_TOL, format!("max deviation {worst:e}"))?;
    let labels = ["CR", "SE", "QuickE", "SlowE", "CR", "SlowE"];
    let perfect = compute_metrics(&labels, &labels, &["CR", "SE", "QuickE", "SlowE"]).map_err(|e| e.to_string())?;
    check(
        perfect.accuracy == 1.0 && perfect.macro_f1 == 1.0,
        format!("perfect gave {} / {}", perfect.accuracy, perfect.macro_f1),
    )?;
    Ok(format!(
        "{METRICS_INSTANCES} instances, max deviation {worst:.1e}; perfect = 1.0 / 1.0"
    ))
}

fn interval_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut segments = 0;
    for i in 0..INTERVAL_TIMELINES {
        let tl = random_timeline(&mut rng);
        segments += tl.segment_count();
        check(
            pairs(&overlap_intervals(&tl)) == grid_overlaps(&tl),
            format!("overlaps differ on timeline {i}"),
        )?;
        check(
            pairs(&mutual_silences(&tl)) == grid_mutual_silences(&tl),
            format!("mutual silences differ on timeline {i}"),
        )?;
    }
    Ok(format!("{INTERVAL_TIMELINES} timelines ({segments} segments) exact"))
}

fn determinism() -> Outcome {
    let mix = CorpusMix::uniform(8, 77);
    let templates = BuiltinTemplates::default();
    let model = DurationModel::default();
    let render = |parallel: bool| -> Result<String, String> {
        let corpus = if parallel {
            generate_corpus_parallel(&mix, &templates, &model)
        } else {
            generate_corpus(&mix, &templates, &model)
        }
        .map_err(|e| e.to_string())?;
        let records: Vec<CorpusRecord<'_>> = corpus.iter().map(|s| s.record()).collect();
        serde_json::to_string_pretty(&records).map_err(|e| e.to_string())
    };
    let serial = render(false)?;
    check(serial == render(false)?, "two serial runs differ")?;
    check(serial == render(true)?, "serial and parallel differ")?;
    Ok(format!(
        "{} bytes identical across runs and serial/parallel",
        serial.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("appendix-sample", appendix_sample),
        ("round-trip-corpus", round_trip_corpus),
        ("delayed-gap-boundary", delayed_gap_boundary),
        ("grpo-arithmetic", grpo_arithmetic),
        ("reward-values", reward_values),
        ("metrics-oracle", metrics_oracle),
        ("interval-oracle", interval_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
