//! Standardization and principal component analysis with a cyclic Jacobi
//! eigensolver.
//!
//! Conventions: standardization uses the population standard deviation
//! (divide by n); the covariance passed to the eigensolver uses 1/(n-1),
//! which leaves components and explained-variance ratios unchanged. Each
//! component's sign is fixed so its largest-magnitude coordinate (lowest
//! index on ties) is positive, making fits fully deterministic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("covariance matrix contains non-finite entries")]
    DegenerateCovariance,
    #[error("input has {got} columns, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("variance threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("cannot keep {requested} components of {available}")]
    TooManyComponents { requested: usize, available: usize },
    #[error("all columns have zero variance")]
    NoVaryingColumns,
}

/// Per-column centering and scaling fitted on training data. Columns whose
/// variance is below 1e-12 are recorded and dropped by `apply`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations (divide by n), for all original
    /// columns; zero for dropped ones.
    pub std_devs: Vec<f64>,
    pub kept_columns: Vec<usize>,
    pub dropped_columns: Vec<usize>,
}

const ZERO_VARIANCE: f64 = 1e-12;

pub fn fit_standardizer(ds: &Dataset) -> Result<Standardizer, PcaError> {
    let n = ds.n_rows();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let d = ds.n_features();
    let mut means = vec![0.0; d];
    for row in ds.features.rows_iter() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut variances = vec![0.0; d];
    for row in ds.features.rows_iter() {
        for ((var, v), m) in variances.iter_mut().zip(row).zip(&means) {
            let c = v - m;
            *var += c * c;
        }
    }
    let mut std_devs = vec![0.0; d];
    let mut kept_columns = Vec::new();
    let mut dropped_columns = Vec::new();
    for c in 0..d {
        let var = variances[c] / n as f64;
        if var < ZERO_VARIANCE {
            dropped_columns.push(c);
        } else {
            std_devs[c] = var.sqrt();
            kept_columns.push(c);
        }
    }
    if kept_columns.is_empty() {
        return Err(PcaError::NoVaryingColumns);
    }
    Ok(Standardizer {
        means,
        std_devs,
        kept_columns,
        dropped_columns,
    })
}

impl Standardizer {
    /// Centers and scales the kept columns; dropped columns disappear from
    /// the output dataset.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset, PcaError> {
        if ds.n_features() != self.means.len() {
            return Err(PcaError::DimensionMismatch {
                got: ds.n_features(),
                expected: self.means.len(),
            });
        }
        let mut out = Matrix::zeros(ds.n_rows(), self.kept_columns.len());
        for r in 0..ds.n_rows() {
            let row = ds.features.row(r);
            for (j, &c) in self.kept_columns.iter().enumerate() {
                out.set(r, j, (row[c] - self.means[c]) / self.std_devs[c]);
            }
        }
        let names = self
            .kept_columns
            .iter()
            .map(|&c| ds.feature_names[c].clone())
            .collect();
        let mut standardized = Dataset {
            features: out,
            labels: ds.labels.clone(),
            feature_names: names,
            transform_log: ds.transform_log.clone(),
        };
        standardized.log(format!(
            "standardize:kept={},dropped={}",
            self.kept_columns.len(),
            self.dropped_columns.len()
        ));
        Ok(standardized)
    }
}

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSelection {
    NComponents(usize),
    /// Smallest m whose cumulative explained-variance ratio reaches the
    /// threshold (in (0, 1]).
    VarianceThreshold(f64),
}

/// A fitted PCA basis: row `i` of `components` is the i-th principal axis in
/// feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Matrix,
    /// Eigenvalues of the retained components, non-increasing, clamped at 0.
    pub explained_variance: Vec<f64>,
    /// Trace of the covariance matrix (sum of all eigenvalues).
    pub total_variance: f64,
    pub n_components: usize,
}

/// Principal components of `x` by eigendecomposition of its covariance
/// matrix. Components are ordered by descending eigenvalue; equal
/// eigenvalues keep the solver's column order.
pub fn fit_pca(x: &Matrix, selection: ComponentSelection) -> Result<PcaModel, PcaError> {
    let n = x.n_rows();
    let d = x.n_cols();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let mut mean = vec![0.0; d];
    for row in x.rows_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    // sample covariance, 1/(n-1)
    let mut cov = Matrix::zeros(d, d);
    for row in x.rows_iter() {
        for j in 0..d {
            let cj = row[j] - mean[j];
            for k in j..d {
                let v = cov.get(j, k) + cj * (row[k] - mean[k]);
                cov.set(j, k, v);
            }
        }
    }
    let denom = (n - 1) as f64;
    for j in 0..d {
        for k in j..d {
            let v = cov.get(j, k) / denom;
            cov.set(j, k, v);
            cov.set(k, j, v);
        }
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(PcaError::DegenerateCovariance);
    }
    let total_variance: f64 = (0..d).map(|j| cov.get(j, j)).sum();
    if total_variance <= 0.0 || total_variance.is_nan() {
        return Err(PcaError::DegenerateCovariance);
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));

    let n_keep = match selection {
        ComponentSelection::NComponents(m) => {
            if m == 0 || m > d {
                return Err(PcaError::TooManyComponents {
                    requested: m,
                    available: d,
                });
            }
            m
        }
        ComponentSelection::VarianceThreshold(t) => {
            if !(t > 0.0 && t <= 1.0) {
                return Err(PcaError::InvalidThreshold(t));
            }
            let mut cumulative = 0.0;
            let mut m = d;
            for (i, &col) in order.iter().enumerate() {
                cumulative += eigenvalues[col].max(0.0) / total_variance;
                if cumulative >= t {
                    m = i + 1;
                    break;
                }
            }
            m
        }
    };

    let mut components = Matrix::zeros(n_keep, d);
    let mut explained = Vec::with_capacity(n_keep);
    for (i, &col) in order.iter().take(n_keep).enumerate() {
        let mut axis: Vec<f64> = (0..d).map(|r| eigenvectors.get(r, col)).collect();
        // sign convention: largest-magnitude coordinate positive
        let mut pivot = 0;
        for (j, v) in axis.iter().enumerate() {
            if v.abs() > axis[pivot].abs() {
                pivot = j;
            }
        }
        if axis[pivot] < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        for (j, v) in axis.iter().enumerate() {
            components.set(i, j, *v);
        }
        explained.push(eigenvalues[col].max(0.0));
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
        total_variance,
        n_components: n_keep,
    })
}

impl PcaModel {
    /// Per-component share of total variance.
    pub fn explained_variance_ratios(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// Projects rows onto the retained components: `(x - mean) * C^T`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix, PcaError> {
        let d = self.mean.len();
        if x.n_cols() != d {
            return Err(PcaError::DimensionMismatch {
                got: x.n_cols(),
                expected: d,
            });
        }
        let mut scores = Matrix::zeros(x.n_rows(), self.n_components);
        for r in 0..x.n_rows() {
            let row = x.row(r);
            for c in 0..self.n_components {
                let axis = self.components.row(c);
                let mut acc = 0.0;
                for j in 0..d {
                    acc += (row[j] - self.mean[j]) * axis[j];
                }
                scores.set(r, c, acc);
            }
        }
        Ok(scores)
    }

    /// Maps scores back to feature space: `scores * C + mean`.
    pub fn inverse_transform(&self, scores: &Matrix) -> Result<Matrix, PcaError> {
        if scores.n_cols() != self.n_components {
            return Err(PcaError::DimensionMismatch {
                got: scores.n_cols(),
                expected: self.n_components,
            });
        }
        let d = self.mean.len();
        let mut out = Matrix::zeros(scores.n_rows(), d);
        for r in 0..scores.n_rows() {
            let s = scores.row(r);
            let row = out.row_mut(r);
            row.copy_from_slice(&self.mean);
            for (c, &score) in s.iter().enumerate() {
                let axis = self.components.row(c);
                for j in 0..d {
                    row[j] += score * axis[j];
                }
            }
        }
        Ok(out)
    }
}

/// Standardizer plus PCA fitted together; the persisted form of the `pca`
/// CLI subcommand and the transform applied by the experiment regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaPipeline {
    pub standardizer: Standardizer,
    pub model: PcaModel,
}

impl PcaPipeline {
    pub fn fit(ds: &Dataset, selection: ComponentSelection) -> Result<Self, PcaError> {
        let standardizer = fit_standardizer(ds)?;
        let standardized = standardizer.apply(ds)?;
        let model = fit_pca(&standardized.features, selection)?;
        Ok(PcaPipeline {
            standardizer,
            model,
        })
    }

    /// Standardizes then projects; output columns are named `pc0..pcM`.
    pub fn transform(&self, ds: &Dataset) -> Result<Dataset, PcaError> {
        let standardized = self.standardizer.apply(ds)?;
        let scores = self.model.transform(&standardized.features)?;
        let names = (0..self.model.n_components)
            .map(|i| format!("pc{i}"))
            .collect();
        let mut out = Dataset {
            features: scores,
            labels: standardized.labels,
            feature_names: names,
            transform_log: standardized.transform_log,
        };
        out.log(format!("pca:components={}", self.model.n_components));
        Ok(out)
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm drops to 1e-10 or 100 sweeps elapse. Returns
/// eigenvalues and the orthogonal matrix whose columns are the matching
/// eigenvectors.
fn jacobi_eigen(symmetric: &Matrix) -> (Vec<f64>, Matrix) {
    let d = symmetric.n_rows();
    let mut a = symmetric.clone();
    let mut v = Matrix::zeros(d, d);
    for i in 0..d {
        v.set(i, i, 1.0);
    }
    const TOLERANCE: f64 = 1e-10;
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += 2.0 * a.get(p, q) * a.get(p, q);
            }
        }
        if off.sqrt() <= TOLERANCE {
            break;
        }
        for p in 0..d.saturating_sub(1) {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for r in 0..d {
                    if r != p && r != q {
                        let arp = a.get(r, p);
                        let arq = a.get(r, q);
                        a.set(r, p, c * arp - s * arq);
                        a.set(p, r, c * arp - s * arq);
                        a.set(r, q, s * arp + c * arq);
                        a.set(q, r, s * arp + c * arq);
                    }
                }
                for r in 0..d {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, c * vrp - s * vrq);
                    v.set(r, q, s * vrp + c * vrq);
                }
            }
        }
    }
    let eigenvalues = (0..d).map(|i| a.get(i, i)).collect();
    (eigenvalues, v)
}
