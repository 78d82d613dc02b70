//! Confusion-matrix statistics and ROC analysis.
//!
//! Class 1 (default / minority) is the positive class. Headline AUC uses the
//! rank statistic — the probability a random positive outranks a random
//! negative, ties counted half — which equals trapezoidal integration of the
//! threshold-swept ROC curve.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{truths} labels but {scores} scores")]
    LengthMismatch { truths: usize, scores: usize },
    #[error("both classes must be present")]
    SingleClassInput,
    #[error("scores must be finite")]
    NonFiniteScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Tally predictions against truth: predict 1 iff `proba >= threshold`.
pub fn confusion(
    y_true: &[u8],
    proba: &[f64],
    threshold: f64,
) -> Result<ConfusionCounts, MetricsError> {
    if y_true.len() != proba.len() {
        return Err(MetricsError::LengthMismatch {
            truths: y_true.len(),
            scores: proba.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (&label, &p) in y_true.iter().zip(proba) {
        let predicted = p >= threshold;
        match (label == 1, predicted) {
            (true, true) => counts.true_positives += 1,
            (true, false) => counts.false_negatives += 1,
            (false, true) => counts.false_positives += 1,
            (false, false) => counts.true_negatives += 1,
        }
    }
    Ok(counts)
}

/// `TP / (TP + FP)`; 0 when undefined.
pub fn precision(c: &ConfusionCounts) -> f64 {
    ratio(c.true_positives, c.true_positives + c.false_positives)
}

/// `TP / (TP + FN)`; 0 when undefined.
pub fn recall(c: &ConfusionCounts) -> f64 {
    ratio(c.true_positives, c.true_positives + c.false_negatives)
}

/// Harmonic mean of precision and recall; 0 when their sum is 0.
pub fn f1(c: &ConfusionCounts) -> f64 {
    let p = precision(c);
    let r = recall(c);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    ratio(c.true_positives + c.true_negatives, c.total())
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Threshold-swept ROC curve with its trapezoidal area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false_positive_rate, true_positive_rate)` from threshold +inf down
    /// to the minimum score; starts at (0,0), ends at (1,1), both
    /// coordinates non-decreasing.
    pub points: Vec<(f64, f64)>,
    /// Trapezoidal area under the curve.
    pub auc: f64,
}

/// Sweeps thresholds over the distinct scores, descending; tied scores move
/// the curve in one step.
pub fn roc_curve(y_true: &[u8], proba: &[f64]) -> Result<RocCurve, MetricsError> {
    let (n_pos, n_neg) = validate_scores(y_true, proba)?;
    let mut order: Vec<usize> = (0..proba.len()).collect();
    order.sort_unstable_by(|&a, &b| proba[b].total_cmp(&proba[a]));

    let mut points = Vec::with_capacity(proba.len() + 1);
    points.push((0.0, 0.0));
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let score = proba[order[i]];
        while i < order.len() && proba[order[i]] == score {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }

    let mut auc = 0.0;
    for w in points.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        auc += (x1 - x0) * (y0 + y1) / 2.0;
    }
    Ok(RocCurve { points, auc })
}

/// Rank-statistic AUC: average ranks over tied scores, then
/// `(R_pos - nP(nP+1)/2) / (nP * nN)`.
pub fn roc_auc(y_true: &[u8], proba: &[f64]) -> Result<f64, MetricsError> {
    let (n_pos, n_neg) = validate_scores(y_true, proba)?;
    let mut order: Vec<usize> = (0..proba.len()).collect();
    order.sort_unstable_by(|&a, &b| proba[a].total_cmp(&proba[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = proba[order[i]];
        let start = i;
        while i < order.len() && proba[order[i]] == score {
            i += 1;
        }
        // ranks are 1-based; tied block shares the average rank
        let avg_rank = (start + 1 + i) as f64 / 2.0;
        for &idx in &order[start..i] {
            if y_true[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
    }
    let n_pos = n_pos as f64;
    let n_neg = n_neg as f64;
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

fn validate_scores(y_true: &[u8], proba: &[f64]) -> Result<(usize, usize), MetricsError> {
    if y_true.len() != proba.len() {
        return Err(MetricsError::LengthMismatch {
            truths: y_true.len(),
            scores: proba.len(),
        });
    }
    if proba.iter().any(|p| !p.is_finite()) {
        return Err(MetricsError::NonFiniteScore);
    }
    let n_pos = y_true.iter().filter(|&&l| l == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClassInput);
    }
    Ok((n_pos, n_neg))
}

/// Metrics for one model under one regime. Positive-class precision, recall
/// and F1 plus overall accuracy; `zero_division` flags any 0/0 metric that
/// was reported as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_name: String,
    pub regime_name: String,
    pub confusion: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub accuracy: f64,
    pub zero_division: bool,
}

/// Full evaluation at the given threshold.
pub fn evaluate(
    y_true: &[u8],
    proba: &[f64],
    threshold: f64,
    model_name: impl Into<String>,
    regime_name: impl Into<String>,
) -> Result<MetricsReport, MetricsError> {
    let counts = confusion(y_true, proba, threshold)?;
    let auc = roc_auc(y_true, proba)?;
    let zero_division = counts.true_positives + counts.false_positives == 0
        || counts.true_positives + counts.false_negatives == 0;
    Ok(MetricsReport {
        model_name: model_name.into(),
        regime_name: regime_name.into(),
        confusion: counts,
        precision: precision(&counts),
        recall: recall(&counts),
        f1: f1(&counts),
        auc,
        accuracy: accuracy(&counts),
        zero_division,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn manual_six_sample_tally() {
        let y = [1u8, 0, 1, 0, 1, 0];
        let p = [0.9, 0.8, 0.4, 0.3, 0.6, 0.5];
        // at 0.5: predictions 1,1,0,0,1,1 -> tp=2, fp=2, fn=1, tn=1
        let c = confusion(&y, &p, 0.5).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                true_positives: 2,
                false_positives: 2,
                true_negatives: 1,
                false_negatives: 1,
            }
        );
        assert_eq!(c.total(), 6);
    }

    #[test]
    fn perfect_probabilities_have_no_errors() {
        let y = [1u8, 0, 1, 0];
        let p = [1.0, 0.0, 1.0, 0.0];
        let c = confusion(&y, &p, 0.5).unwrap();
        assert_eq!(c.false_positives, 0);
        assert_eq!(c.false_negatives, 0);
    }

    #[test]
    fn zero_threshold_predicts_everything_positive() {
        let y = [1u8, 0, 1, 0];
        let p = [0.2, 0.1, 0.9, 0.4];
        let c = confusion(&y, &p, 0.0).unwrap();
        assert_eq!(c.true_negatives, 0);
        assert_eq!(c.false_negatives, 0);
        assert_eq!(c.true_positives, 2);
        assert_eq!(c.false_positives, 2);
    }

    #[test]
    fn formula_arithmetic() {
        let c = ConfusionCounts {
            true_positives: 5,
            false_positives: 5,
            true_negatives: 0,
            false_negatives: 5,
        };
        assert_eq!(precision(&c), 0.5);
        assert_eq!(recall(&c), 0.5);
        assert_eq!(f1(&c), 0.5);
    }

    #[test]
    fn zero_over_zero_conventions() {
        let no_positives = ConfusionCounts {
            true_negatives: 4,
            ..Default::default()
        };
        assert_eq!(precision(&no_positives), 0.0);
        assert_eq!(recall(&no_positives), 0.0);
        assert_eq!(f1(&no_positives), 0.0);
    }

    #[test]
    fn hand_pairwise_auc() {
        // positives {0.9, 0.4}, negatives {0.5, 0.1}: 3 of 4 pairs ordered
        let y = [1u8, 1, 0, 0];
        let p = [0.9, 0.4, 0.5, 0.1];
        let auc = roc_auc(&y, &p).unwrap();
        assert!((auc - 0.75).abs() < 1e-15);
        let curve = roc_curve(&y, &p).unwrap();
        assert!((curve.auc - 0.75).abs() < 1e-15);
    }

    #[test]
    fn separated_scores_and_all_ties() {
        let y = [0u8, 0, 1, 1];
        assert_eq!(roc_auc(&y, &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(roc_auc(&y, &[0.5, 0.5, 0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let y = [1u8, 0, 1, 0, 1];
        let p = [0.9, 0.7, 0.7, 0.2, 0.1];
        let curve = roc_curve(&y, &p).unwrap();
        assert_eq!(*curve.points.first().unwrap(), (0.0, 0.0));
        assert_eq!(*curve.points.last().unwrap(), (1.0, 1.0));
        for w in curve.points.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(
            roc_auc(&[1, 1], &[0.5, 0.6]).unwrap_err(),
            MetricsError::SingleClassInput
        ));
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let y = [1u8, 0, 1, 0, 1, 1, 0];
        let p = [0.9, 0.8, 0.75, 0.3, 0.6, 0.2, 0.2];
        let base = roc_auc(&y, &p).unwrap();
        let exp: Vec<f64> = p.iter().map(|v| v.exp()).collect();
        let scaled: Vec<f64> = p.iter().map(|v| 100.0 * v + 3.0).collect();
        assert!((roc_auc(&y, &exp).unwrap() - base).abs() < 1e-12);
        assert!((roc_auc(&y, &scaled).unwrap() - base).abs() < 1e-12);
    }

    /// Brute-force pairwise oracle: count ordered positive/negative pairs,
    /// half credit for ties.
    fn pairwise_auc(y: &[u8], p: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            if yi != 1 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj != 0 {
                    continue;
                }
                pairs += 1.0;
                if p[i] > p[j] {
                    wins += 1.0;
                } else if p[i] == p[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn evaluate_populates_report() {
        let y = [1u8, 0, 1, 0, 1, 0];
        let p = [0.9, 0.8, 0.4, 0.3, 0.6, 0.5];
        let report = evaluate(&y, &p, 0.5, "m", "raw").unwrap();
        assert_eq!(report.model_name, "m");
        assert_eq!(report.regime_name, "raw");
        assert!((report.f1 - 2.0 * (2.0 / 4.0) * (2.0 / 3.0) / (2.0 / 4.0 + 2.0 / 3.0)).abs() < 1e-12);
        assert!(!report.zero_division);
        let all_negative_preds = evaluate(&y, &[0.0; 6], 0.5, "m", "raw").unwrap();
        assert!(all_negative_preds.zero_division);
    }

    proptest! {
        #[test]
        fn rank_auc_equals_trapezoidal_auc(
            labels in proptest::collection::vec(any::<bool>(), 4..200),
            // few distinct values force plenty of ties
            raw_scores in proptest::collection::vec(0u8..12, 4..200),
        ) {
            let n = labels.len().min(raw_scores.len());
            let y: Vec<u8> = labels[..n].iter().map(|&b| u8::from(b)).collect();
            let p: Vec<f64> = raw_scores[..n].iter().map(|&s| f64::from(s) / 11.0).collect();
            if y.contains(&0) && y.contains(&1) {
                let rank = roc_auc(&y, &p).unwrap();
                let trapezoid = roc_curve(&y, &p).unwrap().auc;
                prop_assert!((rank - trapezoid).abs() < 1e-12);
                prop_assert!((rank - pairwise_auc(&y, &p)).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&rank));
            }
        }

        #[test]
        fn metric_ranges_and_f1_identity(
            labels in proptest::collection::vec(any::<bool>(), 1..100),
            scores in proptest::collection::vec(0.0f64..1.0, 1..100),
            threshold in 0.0f64..1.0,
        ) {
            let n = labels.len().min(scores.len());
            let y: Vec<u8> = labels[..n].iter().map(|&b| u8::from(b)).collect();
            let c = confusion(&y, &scores[..n], threshold).unwrap();
            let (p, r, f) = (precision(&c), recall(&c), f1(&c));
            for v in [p, r, f] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if p + r > 0.0 {
                prop_assert_eq!(f, 2.0 * p * r / (p + r));
            } else {
                prop_assert_eq!(f, 0.0);
            }
        }
    }
}
