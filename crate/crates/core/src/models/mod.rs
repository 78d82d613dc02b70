//! Baseline learners: logistic regression, a CART decision tree, and a
//! random forest. All are deterministic (seeded where randomized) and
//! persist to JSON through [`SavedModel`].

mod forest;
mod logistic;
mod tree;

pub use forest::{fit_forest, predict_proba_forest, ForestConfig, ForestModel};
pub use logistic::{
    fit_logistic, logistic_loss, logistic_loss_gradient, predict_proba_logistic, LogisticConfig,
    LogisticModel,
};
pub use tree::{fit_tree, predict_proba_tree, TreeConfig, TreeModel, TreeNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbdt::{self, GbdtError, GbdtModel};
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training data is empty")]
    EmptyData,
    #[error("training loss became non-finite at epoch {0}; lower the learning rate")]
    NonFiniteLoss(usize),
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("{rows} rows but {labels} labels")]
    RowCountMismatch { rows: usize, labels: usize },
    #[error("n_trees must be at least 1")]
    NoTrees,
    #[error("feature_subsample_fraction must lie in (0, 1], got {0}")]
    InvalidFeatureFraction(f64),
    #[error(transparent)]
    Gbdt(#[from] GbdtError),
}

/// Any trained model, tagged for JSON persistence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Logistic(LogisticModel),
    DecisionTree(TreeModel),
    RandomForest(ForestModel),
    Gbdt(GbdtModel),
}

impl SavedModel {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        match self {
            SavedModel::Logistic(m) => predict_proba_logistic(m, x),
            SavedModel::DecisionTree(m) => predict_proba_tree(m, x),
            SavedModel::RandomForest(m) => predict_proba_forest(m, x),
            SavedModel::Gbdt(m) => Ok(gbdt::predict_proba(m, x)?),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedModel::Logistic(_) => "logistic",
            SavedModel::DecisionTree(_) => "decision_tree",
            SavedModel::RandomForest(_) => "random_forest",
            SavedModel::Gbdt(_) => "gbdt",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saved_model_round_trips_through_json() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0u8, 0, 1, 1];
        let model = fit_tree(&x, &y, &TreeConfig::default()).unwrap();
        let saved = SavedModel::DecisionTree(model);
        let json = serde_json::to_string(&saved).unwrap();
        assert!(json.contains("\"kind\":\"decision_tree\""));
        let back: SavedModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, saved);
        assert_eq!(
            back.predict_proba(&x).unwrap(),
            saved.predict_proba(&x).unwrap()
        );
    }
}
