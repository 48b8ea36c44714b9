//! Accuracy, per-class and macro F1, and the confusion matrix over a fixed,
//! ordered class set.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use serde::Serialize;

use crate::error::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport<L> {
    pub classes: Vec<L>,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Aligned with `classes`.
    pub per_class: Vec<ClassScores>,
    /// `confusion[true][predicted]`, both in `classes` order.
    pub confusion: Vec<Vec<u64>>,
}

impl<L: PartialEq> MetricsReport<L> {
    pub fn f1_of(&self, class: &L) -> Option<f64> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| self.per_class[i].f1)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics<L>(predictions: &[L], labels: &[L], class_set: &[L]) -> Result<MetricsReport<L>, MetricsError>
where
    L: Clone + Eq + Hash + Debug,
{
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(MetricsError::Empty);
    }
    let index: HashMap<&L, usize> = class_set.iter().enumerate().map(|(i, c)| (c, i)).collect();
    if class_set.is_empty() || index.len() != class_set.len() {
        return Err(MetricsError::BadClassSet);
    }
    let lookup = |v: &L| {
        index
            .get(v)
            .copied()
            .ok_or_else(|| MetricsError::UnknownClass(format!("{v:?}")))
    };

    let n = class_set.len();
    let mut confusion = vec![vec![0u64; n]; n];
    for (p, t) in predictions.iter().zip(labels) {
        confusion[lookup(t)?][lookup(p)?] += 1;
    }
    let correct: u64 = (0..n).map(|i| confusion[i][i]).sum();
    let per_class: Vec<ClassScores> = (0..n)
        .map(|c| {
            let tp = confusion[c][c];
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassScores {
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|s| s.f1).sum::<f64>() / n as f64;
    Ok(MetricsReport {
        classes: class_set.to_vec(),
        accuracy: ratio(correct, labels.len() as u64),
        macro_f1,
        per_class,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_example() {
        let m = compute_metrics(&[1, 1, 1, 1], &[1, 1, 0, 0], &[0, 1]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.f1_of(&1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.f1_of(&0), Some(0.0));
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.confusion, vec![vec![0, 2], vec![0, 2]]);
    }

    #[test]
    fn perfect_and_unpredicted_class() {
        let labels = ["CR", "SE", "QuickE", "SlowE"];
        let m = compute_metrics(&labels, &labels, &labels).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (1.0, 1.0));
        let preds = ["CR", "SE", "QuickE", "QuickE"];
        let m = compute_metrics(&preds, &labels, &labels).unwrap();
        assert_eq!(m.f1_of(&"SlowE"), Some(0.0));
        assert!((m.macro_f1 - (1.0 + 1.0 + 2.0 / 3.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            compute_metrics(&[1], &[1, 0], &[0, 1]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert_eq!(compute_metrics::<i32>(&[], &[], &[0, 1]), Err(MetricsError::Empty));
        assert_eq!(
            compute_metrics(&[2], &[1], &[0, 1]),
            Err(MetricsError::UnknownClass("2".into()))
        );
        assert_eq!(compute_metrics(&[1], &[1], &[1, 1]), Err(MetricsError::BadClassSet));
    }
}
