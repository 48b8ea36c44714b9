//! Evaluator output parsing, group-relative reward arithmetic and
//! classification metrics.

pub mod evaluation;
pub mod grpo;
pub mod metrics;

pub use evaluation::{parse_evaluation, render_evaluation, EvaluationOutput};
pub use grpo::{
    clipped_objective, clipped_term, group_advantages, grpo_objective, reward, AdvantageSet, CandidateGroup,
    RewardWeights,
};
pub use metrics::{compute_metrics, ClassScores, MetricsReport};
