//! Confusion-matrix metrics: overall accuracy, Cohen's kappa, micro and
//! macro F1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("no samples")]
    Empty,
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
}

/// Rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self, MetricsError> {
        if classes == 0 || counts.len() != classes * classes {
            return Err(MetricsError::LengthMismatch {
                predictions: counts.len(),
                labels: classes * classes,
            });
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.classes).map(<[u64]>::to_vec).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    fn row_sum(&self, c: usize) -> u64 {
        (0..self.classes).map(|p| self.get(c, p)).sum()
    }

    fn col_sum(&self, c: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, c)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunMetrics {
    pub overall_accuracy: f64,
    pub kappa: f64,
    pub f1_micro: f64,
    pub f1_macro: f64,
    /// Set when chance agreement is 1 and kappa is reported as 0.
    pub kappa_degenerate: bool,
}

pub fn confusion(predictions: &[usize], labels: &[usize], classes: usize) -> Result<ConfusionMatrix, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = vec![0u64; classes * classes];
    for (&p, &t) in predictions.iter().zip(labels) {
        if let Some(&class) = [p, t].iter().find(|&&c| c >= classes) {
            return Err(MetricsError::ClassOutOfRange { class, classes });
        }
        counts[t * classes + p] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<RunMetrics, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let n = total as f64;
    let c = cm.classes;
    let rows: Vec<u64> = (0..c).map(|k| cm.row_sum(k)).collect();
    let cols: Vec<u64> = (0..c).map(|k| cm.col_sum(k)).collect();
    let trace = cm.trace();
    let accuracy = trace as f64 / n;
    // integer numerators keep p_e exact until the final division
    let chance: u128 = rows.iter().zip(&cols).map(|(&r, &k)| r as u128 * k as u128).sum();
    let p_e = chance as f64 / (n * n);
    let degenerate = chance == (total as u128) * (total as u128);
    let kappa = if degenerate { 0.0 } else { (accuracy - p_e) / (1.0 - p_e) };

    // pooled counts: every miss is one FP and one FN, so micro F1 = 2TP / (2TP + 2 misses)
    let misses = total - trace;
    let f1_micro = (2 * trace) as f64 / (2 * trace + 2 * misses) as f64;

    let mut f1_sum = 0.0;
    let mut defined = 0usize;
    for k in 0..c {
        if rows[k] == 0 && cols[k] == 0 {
            continue;
        }
        defined += 1;
        let tp = cm.get(k, k);
        if tp > 0 {
            f1_sum += (2 * tp) as f64 / (rows[k] + cols[k]) as f64;
        }
    }
    let f1_macro = if defined == 0 { 0.0 } else { f1_sum / defined as f64 };

    Ok(RunMetrics {
        overall_accuracy: accuracy,
        kappa,
        f1_micro,
        f1_macro,
        kappa_degenerate: degenerate,
    })
}
