//! One-vs-rest linear SVM trained by primal subgradient descent on the
//! regularized hinge objective (Pegasos-style step sizes).
//!
//! Each class gets an independent binary separator with margin
//! `w . x - b`; the bias is updated unregularized. Documents are visited in
//! a seed-determined shuffled order that is re-drawn each epoch from a
//! per-class stream, so training with `epochs = e` is an exact prefix of
//! training with `epochs = e + 1`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::naive_bayes::argmax;
use super::ClassifierError;
use crate::features::DocTermMatrix;
use crate::rng;

/// Bias updates take `BIAS_STEP_SCALE * eta`. The full Pegasos step applied
/// to an unregularized intercept swings it by 1/(lambda t) per violation,
/// which drowns the margins of sparse rows; damping the intercept step is
/// the customary fix for sparse data.
const BIAS_STEP_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    lambda: f64,
    epochs: usize,
    seed: u64,
}

impl LinearSvmModel {
    pub fn train(
        matrix: &DocTermMatrix,
        lambda: f64,
        epochs: usize,
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ClassifierError::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if epochs == 0 {
            return Err(ClassifierError::InvalidParameter(
                "epochs must be positive".into(),
            ));
        }
        let (n_classes, _) = super::validate_matrix(matrix)?;
        let n_terms = matrix.n_terms();
        let n_docs = matrix.n_docs();

        let mut weights = Vec::with_capacity(n_classes);
        let mut bias = Vec::with_capacity(n_classes);
        for class in 0..n_classes {
            let mut order: Vec<usize> = (0..n_docs).collect();
            let mut stream = rng::stream_indexed(seed, b"svm-class", class as u64);

            // w is kept as scale * direction so the per-step shrink touches
            // one scalar instead of every coordinate
            let mut direction = vec![0.0f64; n_terms];
            let mut scale = 1.0f64;
            let mut b = 0.0f64;
            let mut step = 0u64;

            for _ in 0..epochs {
                order.shuffle(&mut stream);
                for &doc in &order {
                    step += 1;
                    let eta = 1.0 / (lambda * step as f64);
                    let row = matrix.row(doc);
                    let y = if matrix.labels()[doc] == class { 1.0 } else { -1.0 };
                    let margin = scale * sparse_dot(&direction, row) - b;

                    scale *= 1.0 - eta * lambda;
                    if scale == 0.0 {
                        // only at the very first step, where w is still zero
                        scale = 1.0;
                        direction.iter_mut().for_each(|d| *d = 0.0);
                    }
                    if y * margin < 1.0 {
                        let coeff = eta * y / scale;
                        for &(col, x) in row {
                            direction[col] += coeff * x;
                        }
                        b -= BIAS_STEP_SCALE * eta * y;
                    }
                }
            }
            weights.push(direction.iter().map(|d| d * scale).collect());
            bias.push(b);
        }
        Ok(Self {
            weights,
            bias,
            lambda,
            epochs,
            seed,
        })
    }

    /// Margins `w_c . x - b_c`; argmax class, lowest index on exact ties.
    pub fn predict(&self, row: &[(usize, f64)]) -> (usize, Vec<f64>) {
        let margins: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| sparse_dot(w, row) - b)
            .collect();
        (argmax(&margins), margins)
    }

    /// Regularized hinge objective summed over the one-vs-rest problems:
    /// `sum_c lambda/2 ||w_c||^2 + mean_i hinge(y_ic, w_c . x_i - b_c)`.
    pub fn objective(&self, matrix: &DocTermMatrix) -> f64 {
        let n_docs = matrix.n_docs() as f64;
        let mut total = 0.0;
        for (class, (w, &b)) in self.weights.iter().zip(&self.bias).enumerate() {
            let reg = 0.5 * self.lambda * w.iter().map(|x| x * x).sum::<f64>();
            let mut hinge = 0.0;
            for (row, &label) in matrix.rows().iter().zip(matrix.labels()) {
                let y = if label == class { 1.0 } else { -1.0 };
                hinge += (1.0 - y * (sparse_dot(w, row) - b)).max(0.0);
            }
            total += reg + hinge / n_docs;
        }
        total
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn sparse_dot(dense: &[f64], row: &[(usize, f64)]) -> f64 {
    row.iter().map(|&(col, x)| dense[col] * x).sum()
}
