//! Exact brute-force k-nearest-neighbor search under Euclidean distance.

use crate::matrix::Matrix;
use crate::stats::squared_distance;

use super::ResampleError;

/// Neighborhood request: `k` neighbors, optionally excluding the query row
/// itself (meaningful for [`QueryPoint::Row`] queries).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborQuery {
    pub k: usize,
    pub exclude_self: bool,
}

impl NeighborQuery {
    pub fn new(k: usize) -> Self {
        NeighborQuery {
            k,
            exclude_self: false,
        }
    }

    pub fn excluding_self(k: usize) -> Self {
        NeighborQuery {
            k,
            exclude_self: true,
        }
    }
}

/// A query location: a free point, or a member row identified by index.
#[derive(Debug, Clone, Copy)]
pub enum QueryPoint<'a> {
    Free(&'a [f64]),
    Row(usize),
}

/// Indices of the `k` reference rows nearest to the query, exact by full
/// distance scan. Distance ties break toward the lower row index.
pub fn knn(
    reference: &Matrix,
    query: QueryPoint<'_>,
    spec: &NeighborQuery,
) -> Result<Vec<usize>, ResampleError> {
    let n = reference.n_rows();
    let excluded = match query {
        QueryPoint::Row(row) => {
            if row >= n {
                return Err(ResampleError::RowOutOfRange { row, rows: n });
            }
            spec.exclude_self.then_some(row)
        }
        QueryPoint::Free(point) => {
            if point.len() != reference.n_cols() {
                return Err(ResampleError::DimensionMismatch {
                    query: point.len(),
                    reference: reference.n_cols(),
                });
            }
            None
        }
    };
    let eligible = n - usize::from(excluded.is_some());
    if spec.k == 0 || spec.k > eligible {
        return Err(ResampleError::KTooLarge {
            k: spec.k,
            eligible,
        });
    }

    let point: &[f64] = match query {
        QueryPoint::Free(p) => p,
        QueryPoint::Row(r) => reference.row(r),
    };
    let mut distances: Vec<(f64, usize)> = (0..n)
        .filter(|&i| Some(i) != excluded)
        .map(|i| (squared_distance(reference.row(i), point), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
    };
    if spec.k < distances.len() {
        distances.select_nth_unstable_by(spec.k - 1, cmp);
        distances.truncate(spec.k);
    }
    distances.sort_unstable_by(cmp);
    Ok(distances.into_iter().map(|(_, i)| i).collect())
}
