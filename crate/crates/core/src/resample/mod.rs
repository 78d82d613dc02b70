//! Resamplers for imbalanced data: random undersampling (with ensemble
//! rounds), SMOTE oversampling, ENN cleaning, and their SMOTEENN
//! composition, all built on an exact brute-force k-NN.

mod enn;
mod knn;
mod smote;
mod undersample;

pub use enn::{enn, enn_scoped, EnnScope};
pub use knn::{knn, NeighborQuery, QueryPoint};
pub use smote::{smote, SmoteConfig};
pub use undersample::{random_undersample, undersample_ensemble};

use thiserror::Error;

use crate::data::{class_counts, Dataset};
use crate::rng::Seed;

#[derive(Debug, Error)]
pub enum ResampleError {
    #[error("k={k} is out of range for {eligible} eligible reference rows")]
    KTooLarge { k: usize, eligible: usize },
    #[error("query dimension {query} does not match reference dimension {reference}")]
    DimensionMismatch { query: usize, reference: usize },
    #[error("row index {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("both classes must be present")]
    SingleClassInput,
    #[error("minority class has {minority} rows; SMOTE with k={k} needs more than k")]
    MinorityTooSmall { minority: usize, k: usize },
    #[error("target_ratio must lie in (0, 1], got {0}")]
    InvalidTargetRatio(f64),
    #[error("dataset has {rows} rows; ENN with k={k} needs more than k")]
    DatasetTooSmall { rows: usize, k: usize },
    #[error("n_rounds must be at least 1")]
    InvalidRounds,
    #[error("max_iterations must be at least 1")]
    InvalidIterations,
}

/// SMOTEENN controls: the SMOTE pass, the ENN neighborhood, and the
/// iteration/stopping rule.
#[derive(Debug, Clone)]
pub struct SmoteennConfig {
    pub smote: SmoteConfig,
    pub enn_k: usize,
    pub enn_scope: EnnScope,
    pub max_iterations: usize,
    /// Stop once `|smaller/larger class ratio - 1| <= balance_tolerance`.
    pub balance_tolerance: f64,
}

impl SmoteennConfig {
    /// Defaults: SMOTE k=5 toward ratio 1.0, ENN k=3 over all rows, a single
    /// iteration, tolerance 0.05.
    pub fn new(seed: Seed) -> Self {
        SmoteennConfig {
            smote: SmoteConfig {
                k: 5,
                target_ratio: 1.0,
                seed,
            },
            enn_k: 3,
            enn_scope: EnnScope::AllRows,
            max_iterations: 1,
            balance_tolerance: 0.05,
        }
    }
}

/// SMOTE followed by ENN, repeated up to `max_iterations`. Iteration `i`
/// runs SMOTE with the derived seed `smote.seed.derive(i)` (i starting at
/// 1). Stops early once the class ratio is within `balance_tolerance` of
/// balance, when an iteration neither adds nor removes rows, or when a class
/// empties out.
pub fn smoteenn(ds: &Dataset, cfg: &SmoteennConfig) -> Result<Dataset, ResampleError> {
    if cfg.max_iterations < 1 {
        return Err(ResampleError::InvalidIterations);
    }
    let mut current = ds.clone();
    for iteration in 1..=cfg.max_iterations as u64 {
        let before = current.n_rows();
        let smote_cfg = SmoteConfig {
            seed: cfg.smote.seed.derive(iteration),
            ..cfg.smote
        };
        current = smote(&current, &smote_cfg)?;
        let after_smote = current.n_rows();
        current = enn_scoped(&current, cfg.enn_k, cfg.enn_scope)?;
        let added = after_smote - before;
        let removed = after_smote - current.n_rows();
        current.log(format!(
            "smoteenn:iter={iteration}(added={added},removed={removed})"
        ));

        let (majority, minority) = class_counts(&current);
        if minority == 0 || majority == 0 {
            break;
        }
        let ratio = minority as f64 / majority as f64;
        if (ratio - 1.0).abs() <= cfg.balance_tolerance || (added == 0 && removed == 0) {
            break;
        }
    }
    Ok(current)
}
