//! Edited Nearest Neighbors cleaning: drop rows whose label loses the
//! majority vote among their k nearest neighbors.

use crate::data::Dataset;

use super::knn::{knn, NeighborQuery, QueryPoint};
use super::ResampleError;

/// Which rows ENN may edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnnScope {
    /// Classic ENN: the retention test applies to every row.
    #[default]
    AllRows,
    /// Only majority-class rows may be removed (the more frequent class,
    /// ties treated as class 0).
    MajorityOnly,
}

/// Classic ENN over all rows. See [`enn_scoped`].
pub fn enn(ds: &Dataset, k: usize) -> Result<Dataset, ResampleError> {
    enn_scoped(ds, k, EnnScope::AllRows)
}

/// Single pass over the original dataset: each row's k nearest neighbors
/// (self excluded, all classes eligible) vote; the row is retained iff its
/// own label holds a strict majority. Ties remove the row. All removals are
/// decided against the original dataset before any are applied, so the
/// result does not depend on row order.
pub fn enn_scoped(ds: &Dataset, k: usize, scope: EnnScope) -> Result<Dataset, ResampleError> {
    if ds.n_rows() <= k {
        return Err(ResampleError::DatasetTooSmall {
            rows: ds.n_rows(),
            k,
        });
    }
    let n1 = ds.labels.iter().filter(|&&l| l == 1).count();
    let majority_label: u8 = u8::from(n1 > ds.n_rows() - n1);

    let spec = NeighborQuery::excluding_self(k);
    let mut retained = Vec::with_capacity(ds.n_rows());
    for row in 0..ds.n_rows() {
        if scope == EnnScope::MajorityOnly && ds.labels[row] != majority_label {
            retained.push(row);
            continue;
        }
        let hood = knn(&ds.features, QueryPoint::Row(row), &spec)?;
        let agreeing = hood.iter().filter(|&&i| ds.labels[i] == ds.labels[row]).count();
        if 2 * agreeing > k {
            retained.push(row);
        }
    }

    let removed = ds.n_rows() - retained.len();
    let mut out = ds.select_rows(&retained);
    out.log(format!("enn:k={k},removed={removed}"));
    Ok(out)
}
