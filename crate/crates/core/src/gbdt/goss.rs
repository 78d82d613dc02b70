//! Gradient-based One-Side Sampling: keep every large-gradient row, sample
//! the rest and reweight so histogram totals stay unbiased.

use serde::{Deserialize, Serialize};

use crate::rng::Seed;

use super::GbdtError;

/// GOSS rates: keep the `top_rate` fraction of rows by |gradient| and sample
/// an `other_rate` fraction of the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossConfig {
    pub top_rate: f64,
    pub other_rate: f64,
}

/// Selects `ceil(a*n)` rows of largest |g| (ties toward the lower row index)
/// with weight 1, plus `ceil(b*n)` rows sampled uniformly without
/// replacement from the rest with weight `(1-a)/b`. Returns ascending row
/// indices with their weights.
pub fn goss_sample(
    grad: &[f64],
    top_rate: f64,
    other_rate: f64,
    seed: Seed,
) -> Result<(Vec<u32>, Vec<f64>), GbdtError> {
    let n = grad.len();
    if !(top_rate > 0.0 && top_rate < 1.0) || !(other_rate > 0.0 && other_rate < 1.0) {
        return Err(GbdtError::InvalidRates(format!(
            "rates must lie in (0,1): a={top_rate}, b={other_rate}"
        )));
    }
    if top_rate + other_rate > 1.0 + 1e-9 {
        return Err(GbdtError::InvalidRates(format!(
            "a + b must not exceed 1: {top_rate} + {other_rate}"
        )));
    }
    if (top_rate * n as f64) < 1.0 {
        return Err(GbdtError::InvalidRates(format!(
            "top rate {top_rate} selects no rows out of {n}"
        )));
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        grad[b as usize]
            .abs()
            .total_cmp(&grad[a as usize].abs())
            .then(a.cmp(&b))
    });
    let n_top = (top_rate * n as f64).ceil() as usize;
    let rest = &order[n_top..];
    let n_sampled = ((other_rate * n as f64).ceil() as usize).min(rest.len());

    let mut rng = seed.rng();
    let sampled = rand::seq::index::sample(&mut rng, rest.len(), n_sampled);
    let amplification = (1.0 - top_rate) / other_rate;

    let mut selected: Vec<(u32, f64)> = order[..n_top].iter().map(|&r| (r, 1.0)).collect();
    selected.extend(sampled.iter().map(|i| (rest[i], amplification)));
    selected.sort_unstable_by_key(|&(r, _)| r);

    let (indices, weights) = selected.into_iter().unzip();
    Ok((indices, weights))
}
