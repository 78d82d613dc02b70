//! Random forest: bootstrapped CART trees with per-split feature
//! subsampling, averaged by probability.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::Seed;

use super::tree::{fit_tree_sampled, predict_proba_tree, FeatureSampler, TreeConfig, TreeModel};
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features considered per split; `None` means `sqrt(d)/d`.
    pub feature_subsample_fraction: Option<f64>,
    /// Sample n rows with replacement per tree; `false` trains every tree on
    /// the full data.
    pub bootstrap: bool,
    pub seed: Seed,
}

impl ForestConfig {
    pub fn new(seed: Seed) -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 6,
            min_samples_leaf: 5,
            feature_subsample_fraction: None,
            bootstrap: true,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    /// Derived seed each tree was built from (bootstrap and feature
    /// subsampling).
    pub tree_seeds: Vec<u64>,
    /// Resolved fraction actually used.
    pub feature_subsample_fraction: f64,
}

/// Trains `n_trees` CART trees; tree `t` draws its bootstrap sample and all
/// per-split feature subsets from `seed.derive(t)`.
pub fn fit_forest(x: &Matrix, y: &[u8], cfg: &ForestConfig) -> Result<ForestModel, ModelError> {
    if cfg.n_trees == 0 {
        return Err(ModelError::NoTrees);
    }
    if x.n_rows() == 0 {
        return Err(ModelError::EmptyData);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::RowCountMismatch {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    let d = x.n_cols();
    let fraction = match cfg.feature_subsample_fraction {
        Some(f) if f > 0.0 && f <= 1.0 => f,
        Some(f) => return Err(ModelError::InvalidFeatureFraction(f)),
        None => (d as f64).sqrt() / d as f64,
    };
    let m_try = ((fraction * d as f64).round() as usize).clamp(1, d);
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
    };

    let n = x.n_rows();
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut tree_seeds = Vec::with_capacity(cfg.n_trees);
    for t in 0..cfg.n_trees as u64 {
        let tree_seed = cfg.seed.derive(t);
        tree_seeds.push(tree_seed.value());
        let mut rng = tree_seed.rng();
        let rows: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut sampler = if m_try == d {
            FeatureSampler::All
        } else {
            FeatureSampler::Random {
                rng: &mut rng,
                m_try,
            }
        };
        trees.push(fit_tree_sampled(x, y, &tree_cfg, rows, &mut sampler)?);
    }
    Ok(ForestModel {
        trees,
        tree_seeds,
        feature_subsample_fraction: fraction,
    })
}

/// Arithmetic mean of the member trees' probabilities.
pub fn predict_proba_forest(m: &ForestModel, x: &Matrix) -> Result<Vec<f64>, ModelError> {
    let mut sums = vec![0.0; x.n_rows()];
    for tree in &m.trees {
        for (acc, p) in sums.iter_mut().zip(predict_proba_tree(tree, x)?) {
            *acc += p;
        }
    }
    let k = m.trees.len() as f64;
    Ok(sums.into_iter().map(|s| s / k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_tree;

    fn gaussian_blobs(n_per_class: usize, separation: f64, seed: u64) -> (Matrix, Vec<u8>) {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = Seed::new(seed).rng();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2u8 {
            let offset = f64::from(class) * separation;
            for _ in 0..n_per_class {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                rows.push(vec![a + offset, b + offset]);
                labels.push(class);
            }
        }
        (Matrix::from_rows(&rows), labels)
    }

    #[test]
    fn degenerate_forest_equals_single_tree() {
        let (x, y) = gaussian_blobs(60, 2.0, 30);
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: 6,
            min_samples_leaf: 5,
            feature_subsample_fraction: Some(1.0),
            bootstrap: false,
            seed: Seed::new(1),
        };
        let forest = fit_forest(&x, &y, &cfg).unwrap();
        let single = fit_tree(&x, &y, &TreeConfig::default()).unwrap();
        assert_eq!(forest.trees[0], single);
        assert_eq!(
            predict_proba_forest(&forest, &x).unwrap(),
            predict_proba_tree(&single, &x).unwrap()
        );
    }

    #[test]
    fn prediction_is_mean_of_member_probabilities() {
        let (x, y) = gaussian_blobs(40, 1.5, 31);
        let cfg = ForestConfig {
            n_trees: 7,
            ..ForestConfig::new(Seed::new(2))
        };
        let forest = fit_forest(&x, &y, &cfg).unwrap();
        let combined = predict_proba_forest(&forest, &x).unwrap();
        for (r, &p) in combined.iter().enumerate() {
            let mean: f64 = forest
                .trees
                .iter()
                .map(|t| predict_proba_tree(t, &x).unwrap()[r])
                .sum::<f64>()
                / 7.0;
            assert!((p - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn prediction_invariant_under_tree_order() {
        let (x, y) = gaussian_blobs(30, 1.0, 32);
        let cfg = ForestConfig {
            n_trees: 5,
            ..ForestConfig::new(Seed::new(3))
        };
        let mut forest = fit_forest(&x, &y, &cfg).unwrap();
        let before = predict_proba_forest(&forest, &x).unwrap();
        forest.trees.reverse();
        let after = predict_proba_forest(&forest, &x).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forest_tracks_single_tree_accuracy_on_blobs() {
        let mut forest_acc = 0.0;
        let mut tree_acc = 0.0;
        for seed in 0..10 {
            let (x, y) = gaussian_blobs(100, 2.0, 200 + seed);
            let forest = fit_forest(&x, &y, &ForestConfig::new(Seed::new(seed))).unwrap();
            let tree = fit_tree(&x, &y, &TreeConfig::default()).unwrap();
            let acc = |proba: &[f64]| {
                proba
                    .iter()
                    .zip(&y)
                    .filter(|(p, &l)| u8::from(**p >= 0.5) == l)
                    .count() as f64
                    / y.len() as f64
            };
            forest_acc += acc(&predict_proba_forest(&forest, &x).unwrap());
            tree_acc += acc(&predict_proba_tree(&tree, &x).unwrap());
        }
        forest_acc /= 10.0;
        tree_acc /= 10.0;
        assert!(
            forest_acc >= tree_acc - 0.02,
            "forest {forest_acc} vs tree {tree_acc}"
        );
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = gaussian_blobs(50, 1.5, 33);
        let cfg = ForestConfig {
            n_trees: 10,
            ..ForestConfig::new(Seed::new(9))
        };
        let a = fit_forest(&x, &y, &cfg).unwrap();
        let b = fit_forest(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let (x, y) = gaussian_blobs(10, 1.0, 34);
        let mut cfg = ForestConfig::new(Seed::new(1));
        cfg.n_trees = 0;
        assert!(matches!(
            fit_forest(&x, &y, &cfg).unwrap_err(),
            ModelError::NoTrees
        ));
        let mut cfg = ForestConfig::new(Seed::new(1));
        cfg.feature_subsample_fraction = Some(1.5);
        assert!(matches!(
            fit_forest(&x, &y, &cfg).unwrap_err(),
            ModelError::InvalidFeatureFraction(_)
        ));
    }
}
