//! Random undersampling of the majority class, and the multi-round variant
//! used for ensemble training.

use crate::data::Dataset;
use crate::rng::Seed;

use super::ResampleError;

/// Keeps every minority row and samples majority rows without replacement
/// down to the minority count. Rows stay in their original order; an already
/// balanced dataset passes through unchanged (log entry aside).
pub fn random_undersample(ds: &Dataset, seed: Seed) -> Result<Dataset, ResampleError> {
    let (zeros, ones) = ds.class_indices();
    if zeros.is_empty() || ones.is_empty() {
        return Err(ResampleError::SingleClassInput);
    }
    let (majority, minority) = if ones.len() > zeros.len() {
        (ones, zeros)
    } else {
        (zeros, ones)
    };

    let mut keep: Vec<usize> = minority.clone();
    if majority.len() > minority.len() {
        let mut rng = seed.rng();
        let chosen = rand::seq::index::sample(&mut rng, majority.len(), minority.len());
        keep.extend(chosen.iter().map(|i| majority[i]));
    } else {
        keep.extend_from_slice(&majority);
    }
    keep.sort_unstable();

    let mut out = ds.select_rows(&keep);
    out.log(format!(
        "undersample:{}:{}(seed={})",
        minority.len(),
        minority.len(),
        seed.value()
    ));
    Ok(out)
}

/// `n_rounds` independent undersamples; round `i` uses the derived seed
/// `seed.derive(i)` with `i` starting at 0. The pipeline trains one model
/// per round and averages predicted probabilities.
pub fn undersample_ensemble(
    ds: &Dataset,
    n_rounds: usize,
    seed: Seed,
) -> Result<Vec<Dataset>, ResampleError> {
    if n_rounds < 1 {
        return Err(ResampleError::InvalidRounds);
    }
    (0..n_rounds as u64)
        .map(|round| random_undersample(ds, seed.derive(round)))
        .collect()
}
