//! Feature binning for histogram-based split finding.
//!
//! A feature with at most `max_bins` distinct values is binned losslessly
//! (one bin per value, edges at midpoints); otherwise edges sit at the
//! empirical quantiles `i / max_bins`. Bin indices fit in a `u8` since
//! `max_bins <= 255`.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::stats::{bin_index, quantile_sorted};

/// Per-feature ascending bin edges. A value equal to an edge bins left of
/// it, so splitting "bin <= b" is the same as "value <= edges[b]".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    feature_edges: Vec<Vec<f64>>,
}

pub fn build_bins(x: &Matrix, max_bins: usize) -> BinMapper {
    let mut feature_edges = Vec::with_capacity(x.n_cols());
    for f in 0..x.n_cols() {
        let mut values = x.column(f);
        values.sort_by(|a, b| a.total_cmp(b));
        let mut distinct = values.clone();
        distinct.dedup();

        let edges: Vec<f64> = if distinct.len() <= max_bins {
            distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
        } else {
            let mut edges: Vec<f64> = (1..max_bins)
                .map(|i| quantile_sorted(&values, i as f64 / max_bins as f64))
                .collect();
            edges.dedup();
            edges
        };
        feature_edges.push(edges);
    }
    BinMapper { feature_edges }
}

impl BinMapper {
    pub fn n_features(&self) -> usize {
        self.feature_edges.len()
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.feature_edges[feature].len() + 1
    }

    pub fn edges(&self, feature: usize) -> &[f64] {
        &self.feature_edges[feature]
    }

    pub fn bin(&self, feature: usize, value: f64) -> u8 {
        bin_index(&self.feature_edges[feature], value) as u8
    }

    /// Raw-value threshold equivalent to splitting at `bin`: rows go left
    /// iff `value <= threshold`.
    pub fn threshold(&self, feature: usize, bin: u8) -> f64 {
        self.feature_edges[feature][bin as usize]
    }

    pub fn bin_matrix(&self, x: &Matrix) -> BinnedMatrix {
        let rows = x.n_rows();
        let cols = x.n_cols();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let row = x.row(r);
            for (f, &v) in row.iter().enumerate() {
                data.push(self.bin(f, v));
            }
        }
        BinnedMatrix { rows, cols, data }
    }
}

/// Row-major matrix of bin indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinnedMatrix {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }
}
