use duplex_core::{analyze, generate_corpus, AnalysisConfig, BuiltinTemplates, CorpusMix, DurationModel, FineLabel};

#[test]
fn analyzer_recovers_compiled_ground_truth() {
    let corpus = generate_corpus(
        &CorpusMix::uniform(80, 2024),
        &BuiltinTemplates::default(),
        &DurationModel::default(),
    )
    .unwrap();
    let cfg = AnalysisConfig::default();
    let mut failures = Vec::new();
    for s in &corpus {
        let report = analyze(&s.scenario.timeline, &cfg).unwrap();
        let kinds_ok = report.events == s.scenario.ground_truth_events;
        let error_ok = report.primary_error() == s.scenario.ground_truth_error;
        let label_ok = (report.fine_grained_label == FineLabel::CR) == s.scenario.ground_truth_error.is_none();
        if !(kinds_ok && error_ok && label_ok) {
            failures.push(format!(
                "{}: events {:?} vs {:?}, error {:?} vs {:?}",
                s.id,
                report.events.iter().map(|e| (e.kind, e.interval)).collect::<Vec<_>>(),
                s.scenario
                    .ground_truth_events
                    .iter()
                    .map(|e| (e.kind, e.interval))
                    .collect::<Vec<_>>(),
                report.primary_error(),
                s.scenario.ground_truth_error
            ));
        }
    }
    assert!(
        failures.is_empty(),
        "{} mismatches:\n{}",
        failures.len(),
        failures[..failures.len().min(5)].join("\n")
    );
}
