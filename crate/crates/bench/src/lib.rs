//! Inputs shared by the benchmarks.

use duplex_core::{
    generate_corpus, parse_document_str, validate_timeline, BuiltinTemplates, CompiledScenario, CorpusMix,
    DialogueTimeline, DurationModel,
};

pub const APPENDIX_F: &str = include_str!("../../../fixtures/appendix_f.json");

pub fn appendix_timeline() -> DialogueTimeline {
    validate_timeline(&parse_document_str(APPENDIX_F).expect("fixture parses")).expect("fixture is valid")
}

/// A compiled corpus with `per_class` scenarios of every class.
pub fn corpus(per_class: usize, seed: u64) -> Vec<CompiledScenario> {
    generate_corpus(
        &CorpusMix::uniform(per_class, seed),
        &BuiltinTemplates::default(),
        &DurationModel::default(),
    )
    .expect("built-in templates compile")
    .into_iter()
    .map(|s| s.scenario)
    .collect()
}

/// `n` evaluator outputs cycling through well-formed, wrong-score and
/// malformed texts.
pub fn evaluator_outputs(n: usize) -> Vec<String> {
    let forms = [
        "<response think>\nplausible\n</response think>\n<fluency think>\nbarge-in at 6.1s\n</fluency think>\n<overall score>0</overall score>",
        "<response_think>fine</response_think><fluency_think>smooth</fluency_think><overall_score>1</overall_score>",
        "<response think>missing the rest",
    ];
    (0..n).map(|i| forms[i % forms.len()].to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_build() {
        assert_eq!(appendix_timeline().segment_count(), 2);
        assert_eq!(corpus(1, 0).len(), 8);
        assert_eq!(evaluator_outputs(4).len(), 4);
    }
}
