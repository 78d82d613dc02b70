//! Toolkit for imbalanced binary classification on tabular data: CSV
//! ingestion and stratified splitting, Information Value feature scoring,
//! resampling (random undersampling, SMOTE, ENN, SMOTEENN), PCA, baseline
//! models, a histogram gradient-boosted tree engine with GOSS and leaf-wise
//! growth, evaluation metrics, and a seeded experiment harness that compares
//! the three preprocessing regimes.
//!
//! Everything randomized takes a [`rng::Seed`]; equal seeds and inputs give
//! bit-identical outputs end to end.

pub mod data;
pub mod gbdt;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod pca;
pub mod pipeline;
pub mod resample;
pub mod rng;
pub mod scoring;

mod stats;

pub use data::Dataset;
pub use matrix::Matrix;
pub use rng::Seed;
