//! SMOTE: synthetic minority oversampling by interpolation toward
//! minority-class neighbors.

use rand::Rng;

use crate::data::Dataset;
use crate::rng::Seed;

use super::knn::{knn, NeighborQuery, QueryPoint};
use super::ResampleError;

/// SMOTE controls. `target_ratio` is the desired minority/majority count
/// ratio after oversampling; SMOTE only adds rows, so a dataset already at
/// or above the target passes through unchanged.
#[derive(Debug, Clone, Copy)]
pub struct SmoteConfig {
    /// Neighbors considered per base point, drawn from the minority class
    /// only, excluding the point itself.
    pub k: usize,
    pub target_ratio: f64,
    pub seed: Seed,
}

/// Appends synthetic minority rows until `minority / majority >=
/// target_ratio`. Base points cycle round-robin over the minority rows in
/// dataset order; each synthesis picks one of the base point's `k` minority
/// neighbors uniformly, draws `lambda ~ U(0,1)`, and emits
/// `x + lambda * (y - x)` with the minority label. Original rows are
/// untouched.
pub fn smote(ds: &Dataset, cfg: &SmoteConfig) -> Result<Dataset, ResampleError> {
    if !(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0) {
        return Err(ResampleError::InvalidTargetRatio(cfg.target_ratio));
    }
    let (zeros, ones) = ds.class_indices();
    if zeros.is_empty() || ones.is_empty() {
        return Err(ResampleError::SingleClassInput);
    }
    let (minority_rows, minority_label) = if ones.len() <= zeros.len() {
        (ones, 1u8)
    } else {
        (zeros, 0u8)
    };
    let n_minority = minority_rows.len();
    let n_majority = ds.n_rows() - n_minority;
    if n_minority <= cfg.k {
        return Err(ResampleError::MinorityTooSmall {
            minority: n_minority,
            k: cfg.k,
        });
    }

    let needed = (cfg.target_ratio * n_majority as f64).ceil() as usize;
    let n_synthetic = needed.saturating_sub(n_minority);
    if n_synthetic == 0 {
        let mut out = ds.clone();
        out.log(format!("smote:k={},added=0", cfg.k));
        return Ok(out);
    }

    let minority = ds.features.select_rows(&minority_rows);
    let neighbors: Vec<Vec<usize>> = (0..n_minority)
        .map(|i| {
            knn(
                &minority,
                QueryPoint::Row(i),
                &NeighborQuery::excluding_self(cfg.k),
            )
        })
        .collect::<Result<_, _>>()?;

    let mut rng = cfg.seed.rng();
    let mut features = ds.features.clone();
    let mut labels = ds.labels.clone();
    let mut synthetic = vec![0.0; ds.n_features()];
    for s in 0..n_synthetic {
        let base = s % n_minority;
        let neighbor = neighbors[base][rng.random_range(0..cfg.k)];
        let lambda: f64 = rng.random();
        let x = minority.row(base);
        let y = minority.row(neighbor);
        for (out, (&xi, &yi)) in synthetic.iter_mut().zip(x.iter().zip(y)) {
            *out = interpolate(xi, yi, lambda);
        }
        features.push_row(&synthetic);
        labels.push(minority_label);
    }

    let mut out = Dataset {
        features,
        labels,
        feature_names: ds.feature_names.clone(),
        transform_log: ds.transform_log.clone(),
    };
    out.log(format!(
        "smote:k={},target_ratio={},added={n_synthetic}(seed={})",
        cfg.k,
        cfg.target_ratio,
        cfg.seed.value()
    ));
    Ok(out)
}

#[inline]
fn interpolate(x: f64, y: f64, lambda: f64) -> f64 {
    x + lambda * (y - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::class_counts;
    use crate::matrix::Matrix;

    fn imbalanced(n_majority: usize, n_minority: usize, seed: u64) -> Dataset {
        let mut rng = Seed::new(seed).rng();
        let n = n_majority + n_minority;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let offset = if i < n_majority { 0.0 } else { 5.0 };
                vec![
                    offset + rng.random::<f64>(),
                    offset + rng.random::<f64>(),
                    offset + rng.random::<f64>(),
                ]
            })
            .collect();
        let labels = (0..n).map(|i| u8::from(i >= n_majority)).collect();
        Dataset::new(
            Matrix::from_rows(&rows),
            labels,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn interpolation_endpoints() {
        assert_eq!(interpolate(2.0, 7.0, 0.0), 2.0);
        assert_eq!(interpolate(2.0, 7.0, 1.0), 7.0);
        assert_eq!(interpolate(2.0, 7.0, 0.5), 4.5);
    }

    #[test]
    fn adds_exactly_the_arithmetic_count() {
        let ds = imbalanced(100, 10, 1);
        let cfg = SmoteConfig {
            k: 5,
            target_ratio: 1.0,
            seed: Seed::new(2),
        };
        let out = smote(&ds, &cfg).unwrap();
        assert_eq!(out.n_rows(), 200);
        assert_eq!(class_counts(&out), (100, 100));
    }

    #[test]
    fn originals_are_untouched_and_prefix() {
        let ds = imbalanced(30, 8, 3);
        let cfg = SmoteConfig {
            k: 3,
            target_ratio: 1.0,
            seed: Seed::new(4),
        };
        let out = smote(&ds, &cfg).unwrap();
        for r in 0..ds.n_rows() {
            assert_eq!(out.features.row(r), ds.features.row(r));
            assert_eq!(out.labels[r], ds.labels[r]);
        }
        assert!(out.labels[ds.n_rows()..].iter().all(|&l| l == 1));
    }

    #[test]
    fn synthetics_stay_within_neighbor_bounds() {
        let ds = imbalanced(60, 12, 5);
        let k = 4;
        let cfg = SmoteConfig {
            k,
            target_ratio: 1.0,
            seed: Seed::new(6),
        };
        let out = smote(&ds, &cfg).unwrap();

        let (_, minority_rows) = ds.class_indices();
        let minority = ds.features.select_rows(&minority_rows);
        let n_minority = minority_rows.len();
        for (s, r) in (ds.n_rows()..out.n_rows()).enumerate() {
            // round-robin base assignment is part of the contract
            let base = s % n_minority;
            let hood = knn(
                &minority,
                QueryPoint::Row(base),
                &NeighborQuery::excluding_self(k),
            )
            .unwrap();
            let synth = out.features.row(r);
            for (c, &value) in synth.iter().enumerate() {
                let xs = minority.get(base, c);
                let mut lo = xs;
                let mut hi = xs;
                for &h in &hood {
                    lo = lo.min(minority.get(h, c));
                    hi = hi.max(minority.get(h, c));
                }
                assert!(
                    value >= lo - 1e-12 && value <= hi + 1e-12,
                    "synthetic coordinate {value} outside [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn no_op_when_target_already_met() {
        let ds = imbalanced(10, 10, 7);
        let cfg = SmoteConfig {
            k: 3,
            target_ratio: 1.0,
            seed: Seed::new(8),
        };
        let out = smote(&ds, &cfg).unwrap();
        assert_eq!(out.n_rows(), 20);
    }

    #[test]
    fn minority_too_small_rejected() {
        let ds = imbalanced(20, 4, 9);
        let cfg = SmoteConfig {
            k: 5,
            target_ratio: 1.0,
            seed: Seed::new(1),
        };
        assert!(matches!(
            smote(&ds, &cfg).unwrap_err(),
            ResampleError::MinorityTooSmall { minority: 4, k: 5 }
        ));
    }

    #[test]
    fn invalid_ratio_rejected() {
        let ds = imbalanced(20, 6, 9);
        for ratio in [0.0, -1.0, 1.5] {
            let cfg = SmoteConfig {
                k: 3,
                target_ratio: ratio,
                seed: Seed::new(1),
            };
            assert!(matches!(
                smote(&ds, &cfg).unwrap_err(),
                ResampleError::InvalidTargetRatio(_)
            ));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = imbalanced(50, 9, 11);
        let cfg = SmoteConfig {
            k: 4,
            target_ratio: 0.8,
            seed: Seed::new(21),
        };
        assert_eq!(smote(&ds, &cfg).unwrap(), smote(&ds, &cfg).unwrap());
    }
}
