//! Group-relative rewards, advantages and the clipped surrogate objective.

use serde::{Deserialize, Serialize};

use crate::error::RewardError;
use crate::reward::evaluation::parse_evaluation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub lambda_fmt: f64,
    pub lambda_acc: f64,
}

impl RewardWeights {
    pub fn new(lambda_fmt: f64, lambda_acc: f64) -> Result<Self, RewardError> {
        let w = RewardWeights { lambda_fmt, lambda_acc };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        let (f, a) = (self.lambda_fmt, self.lambda_acc);
        let ok = f.is_finite() && a.is_finite() && f >= 0.0 && a >= 0.0 && ((f + a) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(RewardError::BadWeights { fmt: f, acc: a })
        }
    }
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            lambda_fmt: 0.5,
            lambda_acc: 0.5,
        }
    }
}

fn check_ground_truth(s_gt: i64) -> Result<u8, RewardError> {
    match s_gt {
        0 => Ok(0),
        1 => Ok(1),
        other => Err(RewardError::BadGroundTruth(other)),
    }
}

/// `λ_fmt·[well formed] + λ_acc·[score matches s_gt]`.
pub fn reward(text: &str, s_gt: i64, weights: &RewardWeights) -> Result<f64, RewardError> {
    weights.validate()?;
    let s_gt = check_ground_truth(s_gt)?;
    let eval = parse_evaluation(text);
    let fmt = if eval.format_ok { weights.lambda_fmt } else { 0.0 };
    let acc = if eval.score == Some(s_gt) {
        weights.lambda_acc
    } else {
        0.0
    };
    Ok(fmt + acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageSet {
    pub rewards: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub advantages: Vec<f64>,
}

/// Rewards standardized within the group; all zero when the rewards are
/// all equal.
pub fn group_advantages(rewards: &[f64]) -> Result<AdvantageSet, RewardError> {
    if rewards.len() < 2 {
        return Err(RewardError::GroupTooSmall(rewards.len()));
    }
    if let Some(bad) = rewards.iter().find(|r| !r.is_finite()) {
        return Err(RewardError::NonFinite(*bad));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let first = rewards[0];
    if rewards.iter().all(|&r| r == first) {
        return Ok(AdvantageSet {
            rewards: rewards.to_vec(),
            mean: first,
            std: 0.0,
            advantages: vec![0.0; rewards.len()],
        });
    }
    let std = (rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(AdvantageSet {
        rewards: rewards.to_vec(),
        mean,
        std,
        advantages: rewards.iter().map(|r| (r - mean) / std).collect(),
    })
}

fn check_epsilon(epsilon: f64) -> Result<(), RewardError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(RewardError::BadEpsilon(epsilon))
    }
}

/// `min(w·A, clip(w, 1-ε, 1+ε)·A)`.
pub fn clipped_term(ratio: f64, advantage: f64, epsilon: f64) -> Result<f64, RewardError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(RewardError::BadRatio(ratio));
    }
    if !advantage.is_finite() {
        return Err(RewardError::NonFinite(advantage));
    }
    check_epsilon(epsilon)?;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    Ok((ratio * advantage).min(clipped * advantage))
}

/// K sampled evaluations of one scenario with its ground-truth score and,
/// optionally, the policy ratios of each sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGroup {
    pub candidates: Vec<String>,
    pub ground_truth: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
}

impl CandidateGroup {
    pub fn new(candidates: Vec<String>, ground_truth: i64, ratios: Option<Vec<f64>>) -> Result<Self, RewardError> {
        let group = CandidateGroup {
            ground_truth: check_ground_truth(ground_truth)?,
            candidates,
            ratios,
        };
        group.validate()?;
        Ok(group)
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        check_ground_truth(i64::from(self.ground_truth))?;
        if self.candidates.len() < 2 {
            return Err(RewardError::GroupTooSmall(self.candidates.len()));
        }
        if let Some(ratios) = &self.ratios {
            if ratios.len() != self.candidates.len() {
                return Err(RewardError::RatioCount {
                    expected: self.candidates.len(),
                    got: ratios.len(),
                });
            }
            if let Some(bad) = ratios.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(RewardError::BadRatio(*bad));
            }
        }
        Ok(())
    }

    pub fn rewards(&self, weights: &RewardWeights) -> Result<Vec<f64>, RewardError> {
        self.candidates
            .iter()
            .map(|c| reward(c, i64::from(self.ground_truth), weights))
            .collect()
    }

    pub fn advantages(&self, weights: &RewardWeights) -> Result<AdvantageSet, RewardError> {
        self.validate()?;
        group_advantages(&self.rewards(weights)?)
    }
}

/// Mean clipped term over a group of rewards and matching ratios.
pub fn clipped_objective(rewards: &[f64], ratios: &[f64], epsilon: f64) -> Result<f64, RewardError> {
    if ratios.len() != rewards.len() {
        return Err(RewardError::RatioCount {
            expected: rewards.len(),
            got: ratios.len(),
        });
    }
    let adv = group_advantages(rewards)?;
    let mut total = 0.0;
    for (w, a) in ratios.iter().zip(&adv.advantages) {
        total += clipped_term(*w, *a, epsilon)?;
    }
    Ok(total / rewards.len() as f64)
}

pub fn grpo_objective(group: &CandidateGroup, weights: &RewardWeights, epsilon: f64) -> Result<f64, RewardError> {
    group.validate()?;
    let ratios = group.ratios.as_ref().ok_or(RewardError::MissingRatios)?;
    clipped_objective(&group.rewards(weights)?, ratios, epsilon)
}
