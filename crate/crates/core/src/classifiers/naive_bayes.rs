//! Multinomial naive Bayes over real-valued weights, all in log space.
//!
//! The estimator sums stored weights per (class, term) and smooths with a
//! Laplace constant, so the same trainer serves TF, TF-IDF, and binary
//! matrices.

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::features::DocTermMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    log_prior: Vec<f64>,
    log_likelihood: Vec<Vec<f64>>,
    alpha: f64,
    n_classes: usize,
    n_terms: usize,
}

impl NaiveBayesModel {
    /// `log_prior[c] = ln(docs_in_c / n_docs)`;
    /// `log_likelihood[c][t] = ln((W(c,t) + alpha) / (sum_t W(c,t) + alpha * n_terms))`
    /// with `W` the per-class sum of stored weights.
    pub fn train(matrix: &DocTermMatrix, alpha: f64) -> Result<Self, ClassifierError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ClassifierError::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let (n_classes, class_docs) = super::validate_matrix(matrix)?;
        let n_terms = matrix.n_terms();
        let n_docs = matrix.n_docs();

        let mut weight_sums = vec![vec![0.0f64; n_terms]; n_classes];
        for (row, &label) in matrix.rows().iter().zip(matrix.labels()) {
            for &(col, w) in row {
                weight_sums[label][col] += w;
            }
        }

        let log_prior = class_docs
            .iter()
            .map(|&c| (c as f64 / n_docs as f64).ln())
            .collect();
        let log_likelihood = weight_sums
            .into_iter()
            .map(|sums| {
                let denom = sums.iter().sum::<f64>() + alpha * n_terms as f64;
                sums.into_iter()
                    .map(|w| ((w + alpha) / denom).ln())
                    .collect()
            })
            .collect();

        Ok(Self {
            log_prior,
            log_likelihood,
            alpha,
            n_classes,
            n_terms,
        })
    }

    /// Scores `log_prior[c] + sum_(t,w) w * log_likelihood[c][t]`, returns
    /// the argmax class (lowest index on exact ties) and the score vector
    /// shifted so its log-sum-exp is zero.
    pub fn predict(&self, row: &[(usize, f64)]) -> (usize, Vec<f64>) {
        let mut scores = self.log_prior.clone();
        for &(col, w) in row {
            for (c, s) in scores.iter_mut().enumerate() {
                *s += w * self.log_likelihood[c][col];
            }
        }
        let class = argmax(&scores);
        let lse = log_sum_exp(&scores);
        for s in &mut scores {
            *s -= lse;
        }
        (class, scores)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn log_likelihood(&self) -> &[Vec<f64>] {
        &self.log_likelihood
    }
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn log_sum_exp(scores: &[f64]) -> f64 {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}
