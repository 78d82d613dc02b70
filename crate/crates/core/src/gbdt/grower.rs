//! Leaf-wise tree growth over binned features.
//!
//! The frontier leaf whose best candidate split has the highest gain splits
//! next (ties go to the oldest leaf). Each split builds the histogram of the
//! smaller child and derives the sibling by parent-child subtraction.

use super::binning::{BinMapper, BinnedMatrix};
use super::histogram::NodeHistogram;
use super::{leaf_weight, split_gain, GbdtConfig, GbdtNode, GbdtTree};

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    bin: u8,
}

struct LeafState {
    node_index: usize,
    rows: Vec<u32>,
    histogram: NodeHistogram,
    sum_grad: f64,
    sum_hess: f64,
    best: Option<Candidate>,
}

/// Grows one regression tree on the selected rows. `weights` is indexed by
/// row id and scales each row's gradient/hessian contribution (GOSS
/// amplification); pass all-ones when every row carries weight 1.
pub fn grow_tree_leafwise(
    binned: &BinnedMatrix,
    mapper: &BinMapper,
    grad: &[f64],
    hess: &[f64],
    weights: &[f64],
    rows: &[u32],
    cfg: &GbdtConfig,
) -> GbdtTree {
    let mut nodes: Vec<GbdtNode> = vec![GbdtNode::Leaf { weight: 0.0 }];
    let histogram = NodeHistogram::build(binned, mapper, rows, grad, hess, weights);
    let (sum_grad, sum_hess, _) = histogram.totals();
    let best = find_best_split(&histogram, sum_grad, sum_hess, cfg);
    let mut leaves = vec![LeafState {
        node_index: 0,
        rows: rows.to_vec(),
        histogram,
        sum_grad,
        sum_hess,
        best,
    }];

    while leaves.len() < cfg.max_leaves {
        // best splittable leaf; strict comparison keeps the oldest on ties
        let mut chosen: Option<(usize, f64)> = None;
        for (i, leaf) in leaves.iter().enumerate() {
            if let Some(c) = leaf.best {
                if chosen.is_none_or(|(_, g)| c.gain > g) {
                    chosen = Some((i, c.gain));
                }
            }
        }
        let Some((leaf_idx, _)) = chosen else { break };
        let leaf = leaves.remove(leaf_idx);
        let candidate = leaf.best.expect("chosen leaf has a candidate");

        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = leaf
            .rows
            .iter()
            .partition(|&&r| binned.get(r as usize, candidate.feature) <= candidate.bin);

        // build the smaller side, subtract for the sibling
        let (small_rows, large_rows, small_is_left) = if left_rows.len() <= right_rows.len() {
            (left_rows, right_rows, true)
        } else {
            (right_rows, left_rows, false)
        };
        let small_hist = NodeHistogram::build(binned, mapper, &small_rows, grad, hess, weights);
        let large_hist = leaf.histogram.subtract(&small_hist);
        let (small_g, small_h, _) = small_hist.totals();
        let (large_g, large_h) = (leaf.sum_grad - small_g, leaf.sum_hess - small_h);

        let left_index = nodes.len();
        nodes.push(GbdtNode::Leaf { weight: 0.0 });
        let right_index = nodes.len();
        nodes.push(GbdtNode::Leaf { weight: 0.0 });
        nodes[leaf.node_index] = GbdtNode::Split {
            feature: candidate.feature,
            bin: candidate.bin,
            threshold: mapper.threshold(candidate.feature, candidate.bin),
            left: left_index as u32,
            right: right_index as u32,
        };

        let mut push_leaf = |node_index: usize, rows: Vec<u32>, histogram: NodeHistogram, g: f64, h: f64| {
            let best = find_best_split(&histogram, g, h, cfg);
            leaves.push(LeafState {
                node_index,
                rows,
                histogram,
                sum_grad: g,
                sum_hess: h,
                best,
            });
        };
        if small_is_left {
            push_leaf(left_index, small_rows, small_hist, small_g, small_h);
            push_leaf(right_index, large_rows, large_hist, large_g, large_h);
        } else {
            push_leaf(right_index, small_rows, small_hist, small_g, small_h);
            push_leaf(left_index, large_rows, large_hist, large_g, large_h);
        }
    }

    for leaf in &leaves {
        nodes[leaf.node_index] = GbdtNode::Leaf {
            weight: leaf_weight(leaf.sum_grad, leaf.sum_hess, cfg.lambda_reg),
        };
    }
    GbdtTree { nodes }
}

/// Scans every feature's histogram left to right. A candidate is valid when
/// both children are non-empty with hessian mass at least
/// `min_child_hessian`; the winner needs gain strictly above zero, ties
/// resolved to the lowest feature then lowest bin.
fn find_best_split(
    histogram: &NodeHistogram,
    sum_grad: f64,
    sum_hess: f64,
    cfg: &GbdtConfig,
) -> Option<Candidate> {
    let (_, _, total_count) = histogram.totals();
    let mut best: Option<Candidate> = None;
    for (feature, bins) in histogram.features.iter().enumerate() {
        let mut left_grad = 0.0;
        let mut left_hess = 0.0;
        let mut left_count = 0u32;
        for (bin, stats) in bins[..bins.len().saturating_sub(1)].iter().enumerate() {
            left_grad += stats.sum_grad;
            left_hess += stats.sum_hess;
            left_count += stats.count;
            if left_count == 0 {
                continue;
            }
            if left_count == total_count {
                break;
            }
            let right_grad = sum_grad - left_grad;
            let right_hess = sum_hess - left_hess;
            if left_hess < cfg.min_child_hessian || right_hess < cfg.min_child_hessian {
                continue;
            }
            let gain = split_gain(
                left_grad,
                left_hess,
                right_grad,
                right_hess,
                cfg.lambda_reg,
                cfg.gamma,
            );
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                best = Some(Candidate {
                    gain,
                    feature,
                    bin: bin as u8,
                });
            }
        }
    }
    best
}
