//! Logistic regression trained by full-batch gradient descent.
//!
//! Objective: mean log-loss plus `0.5 * l2 * ||w||^2` (bias unregularized).

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::stats::{sigmoid, softplus};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective value after each epoch's update.
    pub training_curve: Vec<f64>,
}

/// Regularized mean log-loss at the given parameters.
pub fn logistic_loss(x: &Matrix, y: &[u8], weights: &[f64], bias: f64, l2: f64) -> f64 {
    let n = x.n_rows() as f64;
    let mut loss = 0.0;
    for (row, &label) in x.rows_iter().zip(y) {
        let z: f64 = row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + bias;
        // softplus(z) - y*z is the stable form of the cross-entropy
        loss += softplus(z) - f64::from(label) * z;
    }
    loss / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`logistic_loss`]: `(d/dw, d/db)`.
pub fn logistic_loss_gradient(
    x: &Matrix,
    y: &[u8],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = x.n_rows() as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.rows_iter().zip(y) {
        let z: f64 = row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + bias;
        let residual = sigmoid(z) - f64::from(label);
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

/// Full-batch gradient descent from zero-initialized parameters. Fails with
/// `NonFiniteLoss` if the objective diverges.
pub fn fit_logistic(x: &Matrix, y: &[u8], cfg: &LogisticConfig) -> Result<LogisticModel, ModelError> {
    if x.n_rows() == 0 {
        return Err(ModelError::EmptyData);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::RowCountMismatch {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    let mut weights = vec![0.0; x.n_cols()];
    let mut bias = 0.0;
    let mut training_curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (grad_w, grad_b) = logistic_loss_gradient(x, y, &weights, bias, cfg.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * grad_b;
        let loss = logistic_loss(x, y, &weights, bias, cfg.l2);
        if !loss.is_finite() {
            return Err(ModelError::NonFiniteLoss(epoch));
        }
        training_curve.push(loss);
    }
    Ok(LogisticModel {
        weights,
        bias,
        training_curve,
    })
}

pub fn predict_proba_logistic(m: &LogisticModel, x: &Matrix) -> Result<Vec<f64>, ModelError> {
    if x.n_cols() != m.weights.len() {
        return Err(ModelError::DimensionMismatch {
            got: x.n_cols(),
            expected: m.weights.len(),
        });
    }
    Ok(x.rows_iter()
        .map(|row| {
            let z: f64 = row.iter().zip(&m.weights).map(|(a, b)| a * b).sum::<f64>() + m.bias;
            sigmoid(z)
        })
        .collect())
}
