//! CART decision tree: greedy binary splits by Gini impurity decrease,
//! exhaustive over midpoints of sorted distinct values.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 6,
            min_samples_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Fraction of class-1 training rows that reached this leaf.
        probability: f64,
    },
}

/// Nodes in preorder; the root is index 0. Rows route left when
/// `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
}

/// How candidate features are chosen at each split.
pub(crate) enum FeatureSampler<'a> {
    All,
    /// Forest mode: a fresh uniform subset of `m_try` features per split.
    Random {
        rng: &'a mut ChaCha8Rng,
        m_try: usize,
    },
}

impl FeatureSampler<'_> {
    fn features(&mut self, n_features: usize) -> Vec<usize> {
        match self {
            FeatureSampler::All => (0..n_features).collect(),
            FeatureSampler::Random { rng, m_try } => {
                let mut chosen: Vec<usize> =
                    rand::seq::index::sample(rng, n_features, (*m_try).min(n_features)).into_vec();
                chosen.sort_unstable();
                chosen
            }
        }
    }
}

/// Greedy CART fit. A node becomes a leaf on purity, depth, or when no
/// feasible split leaves both children with `min_samples_leaf` rows; an
/// impure node otherwise takes the best (feature, threshold) by Gini
/// decrease, ties resolved to the lowest feature index then lowest
/// threshold.
pub fn fit_tree(x: &Matrix, y: &[u8], cfg: &TreeConfig) -> Result<TreeModel, ModelError> {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    fit_tree_sampled(x, y, cfg, rows, &mut FeatureSampler::All)
}

pub(crate) fn fit_tree_sampled(
    x: &Matrix,
    y: &[u8],
    cfg: &TreeConfig,
    rows: Vec<usize>,
    sampler: &mut FeatureSampler<'_>,
) -> Result<TreeModel, ModelError> {
    if rows.is_empty() || x.n_rows() == 0 {
        return Err(ModelError::EmptyData);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::RowCountMismatch {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    let mut nodes = Vec::new();
    build_node(x, y, cfg, rows, 0, &mut nodes, sampler);
    Ok(TreeModel { nodes })
}

fn build_node(
    x: &Matrix,
    y: &[u8],
    cfg: &TreeConfig,
    rows: Vec<usize>,
    depth: usize,
    nodes: &mut Vec<TreeNode>,
    sampler: &mut FeatureSampler<'_>,
) -> usize {
    let n = rows.len();
    let n1 = rows.iter().filter(|&&r| y[r] == 1).count();
    let probability = n1 as f64 / n as f64;

    let index = nodes.len();
    nodes.push(TreeNode::Leaf { probability });

    if n1 == 0 || n1 == n || depth >= cfg.max_depth || n < 2 * cfg.min_samples_leaf {
        return index;
    }
    let candidates = sampler.features(x.n_cols());
    let Some((feature, threshold)) = best_split(x, y, &rows, &candidates, cfg.min_samples_leaf)
    else {
        return index;
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&r| x.get(r, feature) <= threshold);
    let left = build_node(x, y, cfg, left_rows, depth + 1, nodes, sampler);
    let right = build_node(x, y, cfg, right_rows, depth + 1, nodes, sampler);
    nodes[index] = TreeNode::Split {
        feature,
        threshold,
        left,
        right,
    };
    index
}

fn gini(n1: usize, n: usize) -> f64 {
    let p = n1 as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn best_split(
    x: &Matrix,
    y: &[u8],
    rows: &[usize],
    features: &[usize],
    min_samples_leaf: usize,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let total_ones = rows.iter().filter(|&&r| y[r] == 1).count();
    let parent_gini = gini(total_ones, n);

    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    let mut values: Vec<(f64, u8)> = Vec::with_capacity(n);
    for &f in features {
        values.clear();
        values.extend(rows.iter().map(|&r| (x.get(r, f), y[r])));
        values.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_n1 = 0usize;
        for i in 1..n {
            if values[i - 1].1 == 1 {
                left_n1 += 1;
            }
            if values[i].0 <= values[i - 1].0 {
                continue;
            }
            if i < min_samples_leaf || n - i < min_samples_leaf {
                continue;
            }
            let threshold = (values[i - 1].0 + values[i].0) / 2.0;
            let left_frac = i as f64 / n as f64;
            let gain = parent_gini
                - left_frac * gini(left_n1, i)
                - (1.0 - left_frac) * gini(total_ones - left_n1, n - i);
            if best.is_none_or(|(g, _, _)| gain > g) {
                best = Some((gain, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

pub fn predict_proba_tree(m: &TreeModel, x: &Matrix) -> Result<Vec<f64>, ModelError> {
    let mut out = Vec::with_capacity(x.n_rows());
    for row in x.rows_iter().take(x.n_rows()) {
        let mut node = 0usize;
        loop {
            match &m.nodes[node] {
                TreeNode::Leaf { probability } => {
                    out.push(*probability);
                    break;
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= row.len() {
                        return Err(ModelError::DimensionMismatch {
                            got: row.len(),
                            expected: feature + 1,
                        });
                    }
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf_config() -> TreeConfig {
        TreeConfig {
            max_depth: 4,
            min_samples_leaf: 1,
        }
    }

    #[test]
    fn pure_labels_give_single_leaf() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let model = fit_tree(&x, &[1, 1, 1], &leaf_config()).unwrap();
        assert_eq!(model.nodes, vec![TreeNode::Leaf { probability: 1.0 }]);
        let model = fit_tree(&x, &[0, 0, 0], &leaf_config()).unwrap();
        assert_eq!(model.nodes, vec![TreeNode::Leaf { probability: 0.0 }]);
    }

    #[test]
    fn xor_solved_at_depth_two() {
        let x = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ]);
        let y = [0u8, 1, 1, 0];
        let cfg = TreeConfig {
            max_depth: 2,
            min_samples_leaf: 1,
        };
        let model = fit_tree(&x, &y, &cfg).unwrap();
        let proba = predict_proba_tree(&model, &x).unwrap();
        for (p, &label) in proba.iter().zip(&y) {
            assert_eq!(u8::from(*p >= 0.5), label, "prediction {p} for label {label}");
        }
    }

    /// Exhaustive oracle over every (feature, midpoint) pair with integer
    /// counting, applying the same tie rule.
    fn brute_force_root(x: &Matrix, y: &[u8], min_leaf: usize) -> Option<(usize, f64)> {
        let n = x.n_rows();
        let total_ones = y.iter().filter(|&&l| l == 1).count();
        let parent = gini(total_ones, n);
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x.n_cols() {
            let mut vals: Vec<f64> = x.column(f);
            vals.sort_by(|a, b| a.total_cmp(b));
            vals.dedup();
            for w in vals.windows(2) {
                let threshold = (w[0] + w[1]) / 2.0;
                let mut left = 0;
                let mut left_ones = 0;
                for (r, &label) in y.iter().enumerate() {
                    if x.get(r, f) <= threshold {
                        left += 1;
                        left_ones += usize::from(label == 1);
                    }
                }
                if left < min_leaf || n - left < min_leaf {
                    continue;
                }
                let gain = parent
                    - (left as f64 / n as f64) * gini(left_ones, left)
                    - ((n - left) as f64 / n as f64) * gini(total_ones - left_ones, n - left);
                let better = match best {
                    None => true,
                    Some((g, bf, bt)) => {
                        gain > g || (gain == g && (f < bf || (f == bf && threshold < bt)))
                    }
                };
                if better {
                    best = Some((gain, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    #[test]
    fn root_split_matches_brute_force() {
        use rand::Rng;
        for seed in 0..10 {
            let mut rng = crate::rng::Seed::new(seed).rng();
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|_| (0..3).map(|_| (rng.random::<f64>() * 8.0).round() / 2.0).collect())
                .collect();
            let y: Vec<u8> = rows
                .iter()
                .map(|r| u8::from(r[0] + r[1] > 4.0 + rng.random::<f64>()))
                .collect();
            if y.iter().all(|&l| l == y[0]) {
                continue;
            }
            let x = Matrix::from_rows(&rows);
            let all: Vec<usize> = (0..40).collect();
            let got = best_split(&x, &y, &all, &[0, 1, 2], 1);
            let want = brute_force_root(&x, &y, 1);
            assert_eq!(got, want, "seed {seed}");
        }
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let y = [0u8, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let cfg = TreeConfig {
            max_depth: 8,
            min_samples_leaf: 3,
        };
        let model = fit_tree(&x, &y, &cfg).unwrap();
        // count rows reaching each leaf
        let mut reach = std::collections::HashMap::new();
        for r in 0..10 {
            let mut node = 0;
            loop {
                match &model.nodes[node] {
                    TreeNode::Leaf { .. } => {
                        *reach.entry(node).or_insert(0usize) += 1;
                        break;
                    }
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        node = if x.get(r, *feature) <= *threshold { *left } else { *right };
                    }
                }
            }
        }
        for (_, count) in reach {
            assert!(count >= 3);
        }
    }

    #[test]
    fn leaf_probability_is_class_fraction() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![0.0], vec![10.0]]);
        let y = [1u8, 0, 1, 0];
        let cfg = TreeConfig {
            max_depth: 1,
            min_samples_leaf: 1,
        };
        let model = fit_tree(&x, &y, &cfg).unwrap();
        let proba = predict_proba_tree(&model, &x).unwrap();
        assert!((proba[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(proba[3], 0.0);
    }

    #[test]
    fn empty_data_rejected() {
        let x = Matrix::zeros(0, 2);
        assert!(matches!(
            fit_tree(&x, &[], &TreeConfig::default()).unwrap_err(),
            ModelError::EmptyData
        ));
    }
}
