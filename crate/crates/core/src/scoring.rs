//! Weight-of-Evidence binning and Information Value feature ranking.
//!
//! "Good" is class 0 (approve) and "bad" is class 1 (default). Per bin,
//! `woe = ln(dist_good / dist_bad)` and the feature's Information Value is
//! `iv = sum (dist_good - dist_bad) * woe`, which is non-negative term by
//! term.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::stats::{bin_index, quantile_sorted};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("need at least 2 distinct values to bin, found {0}")]
    TooFewDistinctValues(usize),
    #[error("need at least 2 bins, got {0}")]
    InvalidBinCount(usize),
    #[error("cannot bin an empty value vector")]
    EmptyValues,
    #[error("{indices} bin indices for {labels} labels")]
    LengthMismatch { indices: usize, labels: usize },
    #[error("bin index {index} out of range for {n_bins} bins")]
    BinIndexOutOfRange { index: usize, n_bins: usize },
    #[error("smoothing must be non-negative, got {0}")]
    NegativeSmoothing(f64),
    #[error("both classes must be present to compute WoE")]
    SingleClassInput,
}

/// Quantile cut points for one feature. `n_bins` is always `edges.len() + 1`;
/// a value equal to an edge falls in the bin left of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub feature_index: usize,
    pub edges: Vec<f64>,
    pub n_bins: usize,
}

impl BinningSpec {
    pub fn bin_of(&self, value: f64) -> usize {
        bin_index(&self.edges, value)
    }

    pub fn assign(&self, values: &[f64]) -> Vec<usize> {
        values.iter().map(|&v| self.bin_of(v)).collect()
    }
}

/// Edges at the empirical quantiles `i / n_bins` (linear interpolation on the
/// sorted values); duplicate quantiles collapse, so fewer effective bins than
/// requested are possible.
pub fn quantile_bins(values: &[f64], n_bins: usize) -> Result<BinningSpec, ScoringError> {
    if n_bins < 2 {
        return Err(ScoringError::InvalidBinCount(n_bins));
    }
    if values.is_empty() {
        return Err(ScoringError::EmptyValues);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let distinct = count_distinct_sorted(&sorted);
    if distinct < 2 {
        return Err(ScoringError::TooFewDistinctValues(distinct));
    }
    let mut edges: Vec<f64> = (1..n_bins)
        .map(|i| quantile_sorted(&sorted, i as f64 / n_bins as f64))
        .collect();
    edges.dedup();
    let n_bins = edges.len() + 1;
    Ok(BinningSpec {
        feature_index: 0,
        edges,
        n_bins,
    })
}

fn count_distinct_sorted(sorted: &[f64]) -> usize {
    let mut n = usize::from(!sorted.is_empty());
    for w in sorted.windows(2) {
        if w[0] != w[1] {
            n += 1;
        }
    }
    n
}

/// One bin of a WoE table. Counts carry the additive smoothing already.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoeBin {
    pub good_count: f64,
    pub bad_count: f64,
    pub dist_good: f64,
    pub dist_bad: f64,
    pub woe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoeTable {
    pub bins: Vec<WoeBin>,
    pub iv: f64,
}

/// WoE and IV from per-sample bin assignments. Every bin-class count is
/// incremented by `smoothing` before distributions are formed, which keeps
/// WoE finite whenever `smoothing > 0`. An empty bin (both smoothed counts
/// zero) contributes woe 0.
pub fn woe_iv(
    bin_indices: &[usize],
    n_bins: usize,
    labels: &[u8],
    smoothing: f64,
) -> Result<WoeTable, ScoringError> {
    if bin_indices.len() != labels.len() {
        return Err(ScoringError::LengthMismatch {
            indices: bin_indices.len(),
            labels: labels.len(),
        });
    }
    if smoothing < 0.0 {
        return Err(ScoringError::NegativeSmoothing(smoothing));
    }
    if let Some(&index) = bin_indices.iter().find(|&&b| b >= n_bins) {
        return Err(ScoringError::BinIndexOutOfRange { index, n_bins });
    }
    let mut good = vec![smoothing; n_bins];
    let mut bad = vec![smoothing; n_bins];
    let mut total_good = 0usize;
    let mut total_bad = 0usize;
    for (&b, &label) in bin_indices.iter().zip(labels) {
        if label == 0 {
            good[b] += 1.0;
            total_good += 1;
        } else {
            bad[b] += 1.0;
            total_bad += 1;
        }
    }
    if total_good == 0 || total_bad == 0 {
        return Err(ScoringError::SingleClassInput);
    }
    let good_sum: f64 = good.iter().sum();
    let bad_sum: f64 = bad.iter().sum();

    let mut bins = Vec::with_capacity(n_bins);
    let mut iv = 0.0;
    for b in 0..n_bins {
        let dist_good = good[b] / good_sum;
        let dist_bad = bad[b] / bad_sum;
        let woe = if dist_good == 0.0 && dist_bad == 0.0 {
            0.0
        } else {
            (dist_good / dist_bad).ln()
        };
        if woe.is_finite() {
            iv += (dist_good - dist_bad) * woe;
        } else {
            iv = f64::INFINITY;
        }
        bins.push(WoeBin {
            good_count: good[b],
            bad_count: bad[b],
            dist_good,
            dist_bad,
            woe,
        });
    }
    Ok(WoeTable { bins, iv })
}

/// IV per feature, descending, ties broken by feature index. Features with
/// fewer than 2 distinct values score 0 (a constant column separates
/// nothing).
pub fn rank_features(
    ds: &Dataset,
    n_bins: usize,
    smoothing: f64,
) -> Result<Vec<(String, f64)>, ScoringError> {
    let mut scored: Vec<(String, f64)> = Vec::with_capacity(ds.n_features());
    for f in 0..ds.n_features() {
        let values = ds.features.column(f);
        let iv = match quantile_bins(&values, n_bins) {
            Ok(spec) => woe_iv(&spec.assign(&values), spec.n_bins, &ds.labels, smoothing)?.iv,
            Err(ScoringError::TooFewDistinctValues(_)) => 0.0,
            Err(e) => return Err(e),
        };
        scored.push((ds.feature_names[f].clone(), iv));
    }
    // Stable sort: equal IVs keep ascending feature-index order.
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use proptest::prelude::*;

    /// Brute-force quantile: positions computed directly on the sorted copy.
    fn oracle_quantile(values: &[f64], q: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let pos = q * (v.len() as f64 - 1.0);
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }

    #[test]
    fn quartile_edges_of_1_to_100() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let spec = quantile_bins(&values, 4).unwrap();
        assert_eq!(spec.edges.len(), 3);
        let expected = [25.75, 50.5, 75.25];
        for (edge, want) in spec.edges.iter().zip(expected) {
            assert!((edge - want).abs() < 1e-12, "edge {edge} vs {want}");
        }
        for (i, edge) in spec.edges.iter().enumerate() {
            let q = (i + 1) as f64 / 4.0;
            assert_eq!(*edge, oracle_quantile(&values, q));
        }
        // quartile bins hold 25 values each under the edge-goes-left rule
        let assigned = spec.assign(&values);
        for b in 0..4 {
            assert_eq!(assigned.iter().filter(|&&a| a == b).count(), 25);
        }
    }

    #[test]
    fn constant_vector_rejected() {
        let err = quantile_bins(&[3.0; 8], 4).unwrap_err();
        assert!(matches!(err, ScoringError::TooFewDistinctValues(1)));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let spec = quantile_bins(&[1.0, 1.0, 1.0, 1.0, 2.0], 4).unwrap();
        assert_eq!(spec.n_bins, 2);
        assert_eq!(spec.edges, vec![1.0]);
    }

    #[test]
    fn hand_computed_woe_and_iv() {
        // bin0: 40 good / 10 bad, bin1: 10 good / 40 bad, no smoothing.
        let mut bins = Vec::new();
        let mut labels = Vec::new();
        for (bin, good, bad) in [(0usize, 40, 10), (1, 10, 40)] {
            bins.extend(std::iter::repeat_n(bin, good));
            labels.extend(std::iter::repeat_n(0u8, good));
            bins.extend(std::iter::repeat_n(bin, bad));
            labels.extend(std::iter::repeat_n(1u8, bad));
        }
        let table = woe_iv(&bins, 2, &labels, 0.0).unwrap();
        let woe0 = (0.8f64 / 0.2).ln();
        assert!((table.bins[0].woe - woe0).abs() < 1e-12);
        assert!((table.bins[0].woe - 1.3863).abs() < 1e-4);
        let iv = (0.8 - 0.2) * woe0 + (0.2 - 0.8) * (0.2f64 / 0.8).ln();
        assert!((table.iv - iv).abs() < 1e-12);
        assert!((table.iv - 1.6636).abs() < 1e-4);
    }

    #[test]
    fn independent_feature_has_zero_iv() {
        // identical class ratio in both bins
        let bins = [0, 0, 0, 1, 1, 1];
        let labels = [0, 0, 1, 0, 0, 1];
        let table = woe_iv(&bins, 2, &labels, 0.0).unwrap();
        assert!(table.iv.abs() < 1e-12);
    }

    #[test]
    fn smoothing_keeps_woe_finite_on_empty_class_bin() {
        let bins = [0, 0, 1, 1];
        let labels = [0, 1, 0, 0]; // bin1 has zero bad
        let table = woe_iv(&bins, 2, &labels, 0.5).unwrap();
        assert!(table.bins[1].woe.is_finite());
        assert!(table.iv.is_finite());
    }

    #[test]
    fn single_class_rejected() {
        let err = woe_iv(&[0, 1], 2, &[0, 0], 0.5).unwrap_err();
        assert!(matches!(err, ScoringError::SingleClassInput));
    }

    #[test]
    fn distributions_sum_to_one() {
        let bins = [0, 1, 2, 0, 1, 2, 0];
        let labels = [0, 1, 0, 1, 0, 1, 0];
        let table = woe_iv(&bins, 3, &labels, 0.5).unwrap();
        let sg: f64 = table.bins.iter().map(|b| b.dist_good).sum();
        let sb: f64 = table.bins.iter().map(|b| b.dist_bad).sum();
        assert!((sg - 1.0).abs() < 1e-9);
        assert!((sb - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relabeling_bins_preserves_iv() {
        let bins = [0usize, 1, 2, 0, 1, 2, 2, 0];
        let labels = [0u8, 1, 0, 1, 0, 1, 1, 0];
        let relabeled: Vec<usize> = bins.iter().map(|&b| 2 - b).collect();
        let a = woe_iv(&bins, 3, &labels, 0.5).unwrap();
        let b = woe_iv(&relabeled, 3, &labels, 0.5).unwrap();
        assert!((a.iv - b.iv).abs() < 1e-12);
    }

    fn toy_dataset() -> Dataset {
        // feature 0 copies the label, feature 1 is a fixed arbitrary pattern
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 4 == 0)).collect();
        let noise = [0.83, 0.12, 0.57, 0.31, 0.92, 0.44, 0.05, 0.76];
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| vec![f64::from(l), noise[i % noise.len()]])
            .collect();
        Dataset::new(
            Matrix::from_rows(&rows),
            labels,
            vec!["copy".into(), "noise".into()],
        )
        .unwrap()
    }

    #[test]
    fn label_copy_outranks_noise() {
        let ranked = rank_features(&toy_dataset(), 4, 0.5).unwrap();
        assert_eq!(ranked[0].0, "copy");
        assert!(ranked[0].1 > ranked[1].1);
    }

    #[test]
    fn equal_features_tie_break_by_index() {
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i % 5 == 0)).collect();
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, i as f64]).collect();
        let ds = Dataset::new(Matrix::from_rows(&rows), labels, vec!["a".into(), "b".into()])
            .unwrap();
        let ranked = rank_features(&ds, 4, 0.5).unwrap();
        assert_eq!(ranked[0].0, "a");
        assert_eq!(ranked[0].1, ranked[1].1);
    }

    #[test]
    fn constant_feature_scores_zero() {
        let labels = vec![0u8, 1, 0, 1];
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![7.0, i as f64]).collect();
        let ds = Dataset::new(Matrix::from_rows(&rows), labels, vec!["c".into(), "x".into()])
            .unwrap();
        let ranked = rank_features(&ds, 2, 0.5).unwrap();
        let c = ranked.iter().find(|(n, _)| n == "c").unwrap();
        assert_eq!(c.1, 0.0);
    }

    /// Naive IV recomputation, fully separate from the library path: count
    /// per-bin class totals with integer arithmetic, then apply the formula.
    fn naive_iv(values: &[f64], labels: &[u8], n_bins: usize, smoothing: f64) -> f64 {
        let spec = quantile_bins(values, n_bins).unwrap();
        let mut good = vec![0usize; spec.n_bins];
        let mut bad = vec![0usize; spec.n_bins];
        for (&v, &l) in values.iter().zip(labels) {
            let mut b = 0;
            while b < spec.edges.len() && v > spec.edges[b] {
                b += 1;
            }
            if l == 0 {
                good[b] += 1;
            } else {
                bad[b] += 1;
            }
        }
        let gs: f64 = good.iter().map(|&g| g as f64 + smoothing).sum();
        let bs: f64 = bad.iter().map(|&b| b as f64 + smoothing).sum();
        (0..spec.n_bins)
            .map(|b| {
                let dg = (good[b] as f64 + smoothing) / gs;
                let db = (bad[b] as f64 + smoothing) / bs;
                (dg - db) * (dg / db).ln()
            })
            .sum()
    }

    #[test]
    fn ranking_matches_naive_recomputation() {
        let mut rng_state = 88172645463325252u64;
        let mut next = move || {
            // xorshift64 for test-local pseudo-random values
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 200;
        let labels: Vec<u8> = (0..n).map(|_| u8::from(next() < 0.3)).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&l| {
                (0..5)
                    .map(|f| next() + f64::from(l) * 0.3 * f as f64)
                    .collect()
            })
            .collect();
        let names: Vec<String> = (0..5).map(|f| format!("f{f}")).collect();
        let ds = Dataset::new(Matrix::from_rows(&rows), labels.clone(), names).unwrap();
        let ranked = rank_features(&ds, 5, 0.5).unwrap();
        for (name, iv) in &ranked {
            let f: usize = name[1..].parse().unwrap();
            let expect = naive_iv(&ds.features.column(f), &labels, 5, 0.5);
            assert!((iv - expect).abs() < 1e-9, "{name}: {iv} vs {expect}");
        }
        // order agrees with the oracle's own descending sort
        let mut oracle: Vec<(usize, f64)> = (0..5)
            .map(|f| (f, naive_iv(&ds.features.column(f), &labels, 5, 0.5)))
            .collect();
        oracle.sort_by(|a, b| b.1.total_cmp(&a.1));
        for ((name, _), (f, _)) in ranked.iter().zip(&oracle) {
            assert_eq!(name, &format!("f{f}"));
        }
    }

    #[test]
    fn permuted_feature_loses_information() {
        let ds = toy_dataset();
        let values = ds.features.column(0);
        let spec = quantile_bins(&values, 2).unwrap();
        let original = woe_iv(&spec.assign(&values), spec.n_bins, &ds.labels, 0.5)
            .unwrap()
            .iv;
        let mut mean_permuted = 0.0;
        let n_trials = 20;
        for t in 0..n_trials {
            let mut rng = crate::rng::Seed::new(t).rng();
            let mut permuted = values.clone();
            for i in (1..permuted.len()).rev() {
                let j = rand::Rng::random_range(&mut rng, 0..=i);
                permuted.swap(i, j);
            }
            let spec = quantile_bins(&permuted, 2).unwrap();
            mean_permuted += woe_iv(&spec.assign(&permuted), spec.n_bins, &ds.labels, 0.5)
                .unwrap()
                .iv;
        }
        mean_permuted /= n_trials as f64;
        assert!(
            mean_permuted < original * 0.2,
            "permuted mean {mean_permuted} vs original {original}"
        );
    }

    proptest! {
        #[test]
        fn iv_is_non_negative(
            bins in proptest::collection::vec(0usize..4, 10..120),
            flips in proptest::collection::vec(any::<bool>(), 10..120),
        ) {
            let n = bins.len().min(flips.len());
            let bins = &bins[..n];
            let labels: Vec<u8> = flips[..n].iter().map(|&b| u8::from(b)).collect();
            if labels.contains(&0) && labels.contains(&1) {
                let table = woe_iv(bins, 4, &labels, 0.5).unwrap();
                prop_assert!(table.iv >= 0.0);
                prop_assert!(table.iv.is_finite());
            }
        }

        #[test]
        fn binning_is_total_and_monotone(
            values in proptest::collection::vec(-1e4f64..1e4, 8..200),
            n_bins in 2usize..12,
        ) {
            if let Ok(spec) = quantile_bins(&values, n_bins) {
                let assigned = spec.assign(&values);
                prop_assert!(assigned.iter().all(|&b| b < spec.n_bins));
                let mut pairs: Vec<(f64, usize)> =
                    values.iter().copied().zip(assigned).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in pairs.windows(2) {
                    prop_assert!(w[0].1 <= w[1].1);
                }
            }
        }
    }
}
