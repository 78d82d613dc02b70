//! Histogram-based gradient-boosted decision trees for binary log-loss:
//! second-order split gain, optional GOSS row sampling, and leaf-wise
//! growth. One engine covers both booster presets.

mod binning;
mod goss;
mod grower;
mod histogram;

pub use binning::{build_bins, BinMapper, BinnedMatrix};
pub use goss::{goss_sample, GossConfig};
pub use grower::grow_tree_leafwise;
pub use histogram::{BinStats, NodeHistogram};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::rng::Seed;
use crate::stats::{sigmoid, softplus};

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid GOSS rates: {0}")]
    InvalidRates(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("{rows} rows but {labels} labels")]
    RowCountMismatch { rows: usize, labels: usize },
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    /// At most 255 so bin indices fit a u8.
    pub max_bins: usize,
    /// Leaf L2 regularization (the objective's lambda).
    pub lambda_reg: f64,
    /// Per-leaf split penalty (the objective's gamma).
    pub gamma: f64,
    pub min_child_hessian: f64,
    /// `None` disables GOSS and every round trains on all rows.
    pub goss: Option<GossConfig>,
    pub seed: Seed,
}

impl GbdtConfig {
    /// Preset without GOSS; leaf-wise growth bounded only by `max_leaves`.
    pub fn xgboost_like(seed: Seed) -> Self {
        GbdtConfig {
            n_rounds: 200,
            learning_rate: 0.1,
            max_leaves: 31,
            max_bins: 255,
            lambda_reg: 1.0,
            gamma: 0.0,
            min_child_hessian: 1e-3,
            goss: None,
            seed,
        }
    }

    /// Preset with GOSS at a=0.2, b=0.1.
    pub fn lightgbm_like(seed: Seed) -> Self {
        GbdtConfig {
            goss: Some(GossConfig {
                top_rate: 0.2,
                other_rate: 0.1,
            }),
            ..GbdtConfig::xgboost_like(seed)
        }
    }

    fn validate(&self) -> Result<(), GbdtError> {
        if self.n_rounds == 0 {
            return Err(GbdtError::InvalidConfig("n_rounds must be at least 1".into()));
        }
        if self.learning_rate <= 0.0 || self.learning_rate.is_nan() {
            return Err(GbdtError::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.max_leaves < 2 {
            return Err(GbdtError::InvalidConfig("max_leaves must be at least 2".into()));
        }
        if self.max_bins < 2 || self.max_bins > 255 {
            return Err(GbdtError::InvalidConfig("max_bins must lie in 2..=255".into()));
        }
        if self.lambda_reg < 0.0 || self.gamma < 0.0 || self.min_child_hessian < 0.0 {
            return Err(GbdtError::InvalidConfig(
                "lambda_reg, gamma and min_child_hessian must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum GbdtNode {
    Split {
        feature: usize,
        bin: u8,
        /// Raw-value form of the bin split: left iff `value <= threshold`.
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        weight: f64,
    },
}

/// One regression tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtTree {
    pub nodes: Vec<GbdtNode>,
}

impl GbdtTree {
    pub fn route_raw(&self, row: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                GbdtNode::Leaf { weight } => return *weight,
                GbdtNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn route_binned(&self, binned: &BinnedMatrix, row: usize) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                GbdtNode::Leaf { weight } => return *weight,
                GbdtNode::Split {
                    feature, bin, left, right, ..
                } => {
                    node = if binned.get(row, *feature) <= *bin {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    /// Log-odds of the training positive rate, clipped away from infinity.
    pub base_score: f64,
    pub trees: Vec<GbdtTree>,
    pub learning_rate: f64,
    pub n_features: usize,
    /// Bin edges the split thresholds were drawn from.
    pub bin_mapper: BinMapper,
    /// Training config snapshot.
    pub config: GbdtConfig,
    /// Mean training log-loss after each round.
    pub training_loss: Vec<f64>,
}

/// Gradient and hessian of the per-sample log-loss at the given raw scores:
/// `g = p - y`, `h = p (1 - p)` with `p = sigmoid(score)`.
pub fn logistic_grad_hess(y: &[u8], scores: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut grad = Vec::with_capacity(y.len());
    let mut hess = Vec::with_capacity(y.len());
    for (&label, &score) in y.iter().zip(scores) {
        let p = sigmoid(score);
        grad.push(p - f64::from(label));
        hess.push(p * (1.0 - p));
    }
    (grad, hess)
}

/// Second-order gain of a candidate split:
/// `0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma`.
pub fn split_gain(
    left_grad: f64,
    left_hess: f64,
    right_grad: f64,
    right_hess: f64,
    lambda: f64,
    gamma: f64,
) -> f64 {
    let parent_grad = left_grad + right_grad;
    let parent_hess = left_hess + right_hess;
    0.5 * (left_grad * left_grad / (left_hess + lambda)
        + right_grad * right_grad / (right_hess + lambda)
        - parent_grad * parent_grad / (parent_hess + lambda))
        - gamma
}

/// Optimal leaf weight `-G / (H + lambda)`.
pub fn leaf_weight(sum_grad: f64, sum_hess: f64, lambda: f64) -> f64 {
    -sum_grad / (sum_hess + lambda)
}

const BASE_RATE_CLIP: f64 = 1e-6;

/// Boosted fit: per round, compute gradients at the current scores,
/// optionally GOSS-sample rows (round r uses `seed.derive(r)`), grow one
/// leaf-wise tree, and advance every row's score by `learning_rate` times
/// its leaf weight.
pub fn fit(x: &Matrix, y: &[u8], cfg: &GbdtConfig) -> Result<GbdtModel, GbdtError> {
    cfg.validate()?;
    let n = x.n_rows();
    if n == 0 {
        return Err(GbdtError::EmptyData);
    }
    if n != y.len() {
        return Err(GbdtError::RowCountMismatch {
            rows: n,
            labels: y.len(),
        });
    }

    let positive_rate = (y.iter().map(|&l| f64::from(l)).sum::<f64>() / n as f64)
        .clamp(BASE_RATE_CLIP, 1.0 - BASE_RATE_CLIP);
    let base_score = (positive_rate / (1.0 - positive_rate)).ln();

    let mapper = build_bins(x, cfg.max_bins);
    let binned = mapper.bin_matrix(x);
    let all_rows: Vec<u32> = (0..n as u32).collect();
    let mut weights = vec![1.0; n];
    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(cfg.n_rounds);
    let mut training_loss = Vec::with_capacity(cfg.n_rounds);

    for round in 0..cfg.n_rounds as u64 {
        let (grad, hess) = logistic_grad_hess(y, &scores);
        let tree = match cfg.goss {
            Some(rates) => {
                let (rows, row_weights) =
                    goss_sample(&grad, rates.top_rate, rates.other_rate, cfg.seed.derive(round))?;
                weights.fill(1.0);
                for (&r, &w) in rows.iter().zip(&row_weights) {
                    weights[r as usize] = w;
                }
                grow_tree_leafwise(&binned, &mapper, &grad, &hess, &weights, &rows, cfg)
            }
            None => grow_tree_leafwise(&binned, &mapper, &grad, &hess, &weights, &all_rows, cfg),
        };
        for (r, score) in scores.iter_mut().enumerate() {
            *score += cfg.learning_rate * tree.route_binned(&binned, r);
        }
        trees.push(tree);
        training_loss.push(mean_log_loss(y, &scores));
    }

    Ok(GbdtModel {
        base_score,
        trees,
        learning_rate: cfg.learning_rate,
        n_features: x.n_cols(),
        bin_mapper: mapper,
        config: *cfg,
        training_loss,
    })
}

fn mean_log_loss(y: &[u8], scores: &[f64]) -> f64 {
    let total: f64 = y
        .iter()
        .zip(scores)
        .map(|(&label, &z)| softplus(z) - f64::from(label) * z)
        .sum();
    total / y.len() as f64
}

/// Raw log-odds: `base_score + learning_rate * sum of leaf weights`.
pub fn predict_raw(model: &GbdtModel, x: &Matrix) -> Result<Vec<f64>, GbdtError> {
    if x.n_cols() != model.n_features {
        return Err(GbdtError::DimensionMismatch {
            got: x.n_cols(),
            expected: model.n_features,
        });
    }
    let mut scores = vec![model.base_score; x.n_rows()];
    for tree in &model.trees {
        for (r, score) in scores.iter_mut().enumerate() {
            *score += model.learning_rate * tree.route_raw(x.row(r));
        }
    }
    Ok(scores)
}

pub fn predict_proba(model: &GbdtModel, x: &Matrix) -> Result<Vec<f64>, GbdtError> {
    Ok(predict_raw(model, x)?.into_iter().map(sigmoid).collect())
}
