//! Confusion matrix and the three reported metrics: accuracy, TPR
//! (macro-averaged recall), and macro-averaged precision, all on a 0-100
//! scale. Zero-division cells count as 0 so every report is well-defined.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("label lists differ in length: {truth} vs {predicted}")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {label} out of range for {k} classes")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("nothing to evaluate")]
    EmptyEvaluation,
}

/// `counts[true][pred]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        let k = counts.len();
        if k == 0 || counts.iter().any(|row| row.len() != k) {
            return Err(EvalError::EmptyEvaluation);
        }
        let cm = Self { k, counts };
        if cm.total() == 0 {
            return Err(EvalError::EmptyEvaluation);
        }
        Ok(cm)
    }
}

/// Tallies `counts[true][pred]` over aligned label lists.
pub fn confusion(truth: &[usize], predicted: &[usize], k: usize) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= k {
            return Err(EvalError::LabelOutOfRange { label: t, k });
        }
        if p >= k {
            return Err(EvalError::LabelOutOfRange { label: p, k });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { k, counts })
}

/// The three headline metrics plus the per-class vectors they average.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub tpr: f64,
    pub precision: f64,
    pub per_class_recall: Vec<f64>,
    pub per_class_precision: Vec<f64>,
    pub n_docs: u64,
}

/// Macro-averaged report over all `k` classes. Recall of an empty row and
/// precision of an empty column are both 0.
pub fn report(cm: &ConfusionMatrix) -> EvalReport {
    let k = cm.k();
    let counts = cm.counts();
    let total = cm.total();
    debug_assert!(total >= 1, "confusion matrices are non-empty by construction");

    let mut trace = 0u64;
    let mut per_class_recall = Vec::with_capacity(k);
    let mut per_class_precision = Vec::with_capacity(k);
    for c in 0..k {
        let diag = counts[c][c];
        trace += diag;
        let row_sum: u64 = counts[c].iter().sum();
        let col_sum: u64 = (0..k).map(|r| counts[r][c]).sum();
        per_class_recall.push(if row_sum == 0 { 0.0 } else { diag as f64 / row_sum as f64 });
        per_class_precision.push(if col_sum == 0 { 0.0 } else { diag as f64 / col_sum as f64 });
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / k as f64;
    EvalReport {
        accuracy: 100.0 * trace as f64 / total as f64,
        tpr: 100.0 * mean(&per_class_recall),
        precision: 100.0 * mean(&per_class_precision),
        per_class_recall,
        per_class_precision,
        n_docs: total,
    }
}

/// Display formatting for metric values: 3 decimals, as the result tables
/// print them. Rounding happens here and only here.
pub fn format_metric(value: f64) -> String {
    format!("{value:.3}")
}
