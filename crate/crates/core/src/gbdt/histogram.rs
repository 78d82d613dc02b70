//! Gradient/hessian histograms accumulated per (feature, bin).

use super::binning::{BinMapper, BinnedMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinStats {
    pub sum_grad: f64,
    pub sum_hess: f64,
    pub count: u32,
}

/// One histogram per feature for the rows of a single tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeHistogram {
    pub features: Vec<Vec<BinStats>>,
}

impl NodeHistogram {
    /// Accumulates `weight[r] * g[r]` and `weight[r] * h[r]` into the bin of
    /// every (row, feature) pair; counts are unweighted.
    pub fn build(
        binned: &BinnedMatrix,
        mapper: &BinMapper,
        rows: &[u32],
        grad: &[f64],
        hess: &[f64],
        weights: &[f64],
    ) -> Self {
        let mut features: Vec<Vec<BinStats>> = (0..mapper.n_features())
            .map(|f| vec![BinStats::default(); mapper.n_bins(f)])
            .collect();
        for &r in rows {
            let r = r as usize;
            let w = weights[r];
            let wg = w * grad[r];
            let wh = w * hess[r];
            let bins = binned.row(r);
            for (stats, &b) in features.iter_mut().zip(bins) {
                let s = &mut stats[b as usize];
                s.sum_grad += wg;
                s.sum_hess += wh;
                s.count += 1;
            }
        }
        NodeHistogram { features }
    }

    /// Sibling histogram: `self - child`, bin by bin.
    pub fn subtract(&self, child: &Self) -> Self {
        let features = self
            .features
            .iter()
            .zip(&child.features)
            .map(|(parent, child)| {
                parent
                    .iter()
                    .zip(child)
                    .map(|(p, c)| BinStats {
                        sum_grad: p.sum_grad - c.sum_grad,
                        sum_hess: p.sum_hess - c.sum_hess,
                        count: p.count - c.count,
                    })
                    .collect()
            })
            .collect();
        NodeHistogram { features }
    }

    /// Totals over one feature's bins (identical for every feature up to
    /// rounding).
    pub fn totals(&self) -> (f64, f64, u32) {
        let first = &self.features[0];
        let mut g = 0.0;
        let mut h = 0.0;
        let mut count = 0;
        for s in first {
            g += s.sum_grad;
            h += s.sum_hess;
            count += s.count;
        }
        (g, h, count)
    }
}
