//! Confusion matrices and classification metrics.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        Self { counts }
    }
}

pub fn confusion(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(EvalError::LabelOutOfRange(t.max(p)));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Macro,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub averaging: Averaging,
    pub per_class: Vec<ClassMetrics>,
    /// Classes never predicted; their precision is reported as 0.
    pub undefined_precision: Vec<usize>,
}

/// One-vs-rest precision, recall and F1 per class, averaged as requested.
/// Undefined ratios (zero denominators) count as 0.
pub fn metrics(cm: &ConfusionMatrix, averaging: Averaging) -> Result<MetricsReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let k = cm.n_classes();
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut per_class = Vec::with_capacity(k);
    let mut undefined_precision = Vec::new();
    for c in 0..k {
        let tp = cm.counts[c][c];
        let predicted: u64 = (0..k).map(|r| cm.counts[r][c]).sum();
        let support: u64 = cm.counts[c].iter().sum();
        if predicted == 0 {
            undefined_precision.push(c);
        }
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let weights: Vec<f64> = match averaging {
        Averaging::Macro => vec![1.0 / k as f64; k],
        Averaging::Weighted => per_class
            .iter()
            .map(|m| m.support as f64 / total as f64)
            .collect(),
    };
    let avg = |f: fn(&ClassMetrics) -> f64| -> f64 {
        per_class.iter().zip(&weights).map(|(m, w)| f(m) * w).sum()
    };
    let trace: u64 = (0..k).map(|c| cm.counts[c][c]).sum();
    Ok(MetricsReport {
        accuracy: trace as f64 / total as f64,
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f1: avg(|m| m.f1),
        averaging,
        per_class,
        undefined_precision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_diagonal() {
        let cm = ConfusionMatrix::from_counts(vec![vec![25, 0, 0], vec![0, 25, 0], vec![0, 0, 25]]);
        let m = metrics(&cm, Averaging::Macro).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn single_apnea_miss() {
        // 15 insomnia, 44 none, 16 apnea; one apnea predicted as none
        let cm = ConfusionMatrix::from_counts(vec![vec![15, 0, 0], vec![0, 44, 0], vec![0, 1, 15]]);
        let m = metrics(&cm, Averaging::Macro).unwrap();
        assert!((m.accuracy - 74.0 / 75.0).abs() < 1e-15);
        let recall = (1.0 + 1.0 + 15.0 / 16.0) / 3.0;
        assert!((m.recall - recall).abs() < 1e-15);
        let precision = (1.0 + 44.0 / 45.0 + 1.0) / 3.0;
        assert!((m.precision - precision).abs() < 1e-15);
    }

    #[test]
    fn never_predicted_class_flagged() {
        let cm = confusion(&[0, 1, 2], &[1, 1, 1], 3).unwrap();
        assert_eq!(cm.counts[0], vec![0, 1, 0]);
        let m = metrics(&cm, Averaging::Macro).unwrap();
        assert_eq!(m.undefined_precision, vec![0, 2]);
        assert_eq!(m.per_class[0].precision, 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            confusion(&[0], &[], 3),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert_eq!(confusion(&[3], &[0], 3), Err(EvalError::LabelOutOfRange(3)));
        let empty = ConfusionMatrix::from_counts(vec![vec![0; 3]; 3]);
        assert_eq!(
            metrics(&empty, Averaging::Macro),
            Err(EvalError::EmptyMatrix)
        );
    }
}
