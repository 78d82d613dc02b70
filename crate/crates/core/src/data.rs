//! Tabular data model: feature matrix plus binary labels, CSV ingestion, and
//! seeded stratified splitting.
//!
//! Label convention: `1` is the minority / default / "not approve" class and
//! is the positive class for every metric in the crate; `0` is the majority /
//! "approve" class.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::rng::Seed;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("label column '{0}' not found in header")]
    MissingColumn(String),
    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("label column is not binary: {0}")]
    LabelNotBinary(String),
    #[error("class {label} has {count} samples; stratified splitting needs at least 2")]
    ClassTooSmall { label: u8, count: usize },
    #[error("test_fraction must lie strictly between 0 and 1, got {0}")]
    InvalidTestFraction(f64),
    #[error("feature matrix has {rows} rows but {labels} labels")]
    RowCountMismatch { rows: usize, labels: usize },
    #[error("{names} feature names for {cols} feature columns")]
    NameCountMismatch { names: usize, cols: usize },
    #[error("non-finite feature value at row {row}, column '{column}'")]
    NonFiniteFeature { row: usize, column: String },
    #[error("column '{0}' has no numeric values to impute a median from")]
    EmptyColumn(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// How to treat empty feature cells during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Reject the file on the first empty cell.
    #[default]
    Error,
    /// Replace empty cells with the column median of the present values.
    ImputeMedian,
}

/// An immutable rectangular dataset with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    /// Ordered descriptors of the transforms applied so far (ingestion,
    /// standardization, resampling passes, ...).
    pub transform_log: Vec<String>,
}

impl Dataset {
    /// Validates the structural invariants: row/label agreement, name count,
    /// finite features, binary labels.
    pub fn new(
        features: Matrix,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if features.n_rows() != labels.len() {
            return Err(DataError::RowCountMismatch {
                rows: features.n_rows(),
                labels: labels.len(),
            });
        }
        if features.n_cols() != feature_names.len() {
            return Err(DataError::NameCountMismatch {
                names: feature_names.len(),
                cols: features.n_cols(),
            });
        }
        for r in 0..features.n_rows() {
            for (c, v) in features.row(r).iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFiniteFeature {
                        row: r,
                        column: feature_names[c].clone(),
                    });
                }
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(DataError::LabelNotBinary(format!("found label {bad}")));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
            transform_log: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn log(&mut self, entry: impl Into<String>) {
        self.transform_log.push(entry.into());
    }

    /// New dataset holding the given rows (in the given order), inheriting
    /// the transform log.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            transform_log: self.transform_log.clone(),
        }
    }

    /// Row indices of each class, ascending.
    pub fn class_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let mut zeros = Vec::new();
        let mut ones = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l == 0 {
                zeros.push(i);
            } else {
                ones.push(i);
            }
        }
        (zeros, ones)
    }
}

/// Counts of the two classes ordered `(majority, minority)`; a tie reports
/// `(count_of_0, count_of_1)`.
pub fn class_counts(ds: &Dataset) -> (usize, usize) {
    let n1 = ds.labels.iter().filter(|&&l| l == 1).count();
    let n0 = ds.labels.len() - n1;
    if n1 > n0 {
        (n1, n0)
    } else {
        (n0, n1)
    }
}

/// Specification of a train/test split.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of rows assigned to the test set, strictly in (0, 1).
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: Seed,
}

/// Splits into train/test, preserving class ratios when stratified. Test
/// counts are `round(class_count * test_fraction)` per class; row order
/// within each part follows the input order.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), DataError> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(DataError::InvalidTestFraction(spec.test_fraction));
    }
    let mut rng = spec.seed.rng();
    let mut test_idx: Vec<usize> = Vec::new();
    let mut train_idx: Vec<usize> = Vec::new();

    if spec.stratified {
        let (zeros, ones) = ds.class_indices();
        for (label, class) in [(0u8, zeros), (1u8, ones)] {
            if class.len() < 2 {
                return Err(DataError::ClassTooSmall {
                    label,
                    count: class.len(),
                });
            }
            let n_test = (class.len() as f64 * spec.test_fraction).round() as usize;
            let mut shuffled = class;
            shuffle(&mut shuffled, &mut rng);
            test_idx.extend_from_slice(&shuffled[..n_test]);
            train_idx.extend_from_slice(&shuffled[n_test..]);
        }
    } else {
        let mut all: Vec<usize> = (0..ds.n_rows()).collect();
        if all.is_empty() {
            return Err(DataError::EmptyFile);
        }
        shuffle(&mut all, &mut rng);
        let n_test = (all.len() as f64 * spec.test_fraction).round() as usize;
        test_idx.extend_from_slice(&all[..n_test]);
        train_idx.extend_from_slice(&all[n_test..]);
    }

    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let mut train = ds.select_rows(&train_idx);
    let mut test = ds.select_rows(&test_idx);
    let stamp = format!(
        "test_fraction={},stratified={},seed={}",
        spec.test_fraction,
        spec.stratified,
        spec.seed.value()
    );
    train.log(format!("split:train({stamp})"));
    test.log(format!("split:test({stamp})"));
    Ok((train, test))
}

fn shuffle(indices: &mut [usize], rng: &mut impl rand::Rng) {
    // Fisher-Yates; kept local so the shuffle order is pinned by this crate
    // rather than by rand's SliceRandom internals.
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
}

/// Loads a CSV with a header row. Every non-label column must parse as a
/// number (empty cells follow `policy`); the label column maps to {0,1}
/// through `label_map`, or must literally be 0/1 when no map is given.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    policy: MissingPolicy,
    label_map: Option<&HashMap<String, u8>>,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut raw_rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let mut row: Vec<Option<f64>> = Vec::with_capacity(feature_names.len());
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                labels.push(parse_label(cell, label_map)?);
                continue;
            }
            let column = &headers[col];
            if cell.is_empty() {
                match policy {
                    MissingPolicy::Error => {
                        return Err(DataError::NonNumericCell {
                            row: row_no,
                            column: column.clone(),
                            value: "<empty>".to_string(),
                        })
                    }
                    MissingPolicy::ImputeMedian => row.push(None),
                }
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| DataError::NonNumericCell {
                row: row_no,
                column: column.clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonFiniteFeature {
                    row: row_no,
                    column: column.clone(),
                });
            }
            row.push(Some(value));
        }
        raw_rows.push(row);
    }
    if raw_rows.is_empty() {
        return Err(DataError::EmptyFile);
    }

    let mut impute_notes = Vec::new();
    let n_cols = feature_names.len();
    let mut features = Matrix::zeros(raw_rows.len(), n_cols);
    for c in 0..n_cols {
        let missing = raw_rows.iter().filter(|r| r[c].is_none()).count();
        let median = if missing > 0 {
            let mut present: Vec<f64> = raw_rows.iter().filter_map(|r| r[c]).collect();
            if present.is_empty() {
                return Err(DataError::EmptyColumn(feature_names[c].clone()));
            }
            present.sort_by(|a, b| a.total_cmp(b));
            let mid = present.len() / 2;
            let m = if present.len().is_multiple_of(2) {
                (present[mid - 1] + present[mid]) / 2.0
            } else {
                present[mid]
            };
            impute_notes.push(format!("impute_median:{}={m}(n={missing})", feature_names[c]));
            Some(m)
        } else {
            None
        };
        for (r, row) in raw_rows.iter().enumerate() {
            features.set(r, c, row[c].unwrap_or_else(|| median.unwrap()));
        }
    }

    let mut ds = Dataset::new(features, labels, feature_names)?;
    let mut entry = String::new();
    let _ = write!(
        entry,
        "ingest:{}({}x{})",
        path.file_name().map(|f| f.to_string_lossy()).unwrap_or_default(),
        ds.n_rows(),
        ds.n_features()
    );
    ds.log(entry);
    for note in impute_notes {
        ds.log(note);
    }
    Ok(ds)
}

fn parse_label(cell: &str, label_map: Option<&HashMap<String, u8>>) -> Result<u8, DataError> {
    if let Some(map) = label_map {
        return match map.get(cell) {
            Some(&v) if v <= 1 => Ok(v),
            Some(&v) => Err(DataError::LabelNotBinary(format!(
                "label map sends '{cell}' to {v}, outside {{0,1}}"
            ))),
            None => Err(DataError::LabelNotBinary(format!(
                "value '{cell}' missing from label map"
            ))),
        };
    }
    match cell.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(DataError::LabelNotBinary(format!(
            "value '{cell}' is not 0 or 1 and no label map was given"
        ))),
    }
}

/// Writes the dataset as CSV: feature columns under their names plus a final
/// `label` column. Feature values use shortest round-trip formatting.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<String> = ds.feature_names.clone();
    header.push("label".to_string());
    writer.write_record(&header)?;
    for r in 0..ds.n_rows() {
        let mut record: Vec<String> = ds.features.row(r).iter().map(|v| v.to_string()).collect();
        record.push(ds.labels[r].to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
