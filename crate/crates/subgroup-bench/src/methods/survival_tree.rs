//! Log-rank survival tree over covariates and treatment jointly, read out as
//! an ARR classifier by navigating each query down both treatment branches.

use crate::data::TrialData;
use crate::survival::kaplan_meier;
use crate::Result;

use super::{quantile_thresholds, FitContext, MethodId, MethodResult, SubgroupPredictor};

const MAX_DEPTH: usize = 5;
const MIN_LEAF: usize = 20;
const DECILES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Split feature: a covariate or the treatment indicator itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeFeature {
    X(usize),
    W,
}

#[derive(Debug, Clone)]
pub enum TreeNode {
    Split {
        feature: TreeFeature,
        /// Left branch takes `value <= threshold`.
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Kaplan-Meier survival of the leaf's subjects at the horizon.
        survival: f64,
        size: usize,
    },
}

/// A fitted survival tree (arena-allocated, root at index 0).
#[derive(Debug, Clone)]
pub struct SurvivalTree {
    pub nodes: Vec<TreeNode>,
    pub horizon: f64,
}

impl SurvivalTree {
    fn leaf_survival(&self, row: &[f64], w: f64) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { survival, .. } => return *survival,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let value = match feature {
                        TreeFeature::X(j) => row[*j],
                        TreeFeature::W => w,
                    };
                    at = if value <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Tree-implied ARR: survival with treatment forced on minus forced off.
    /// Zero when no treatment split separates the two paths.
    pub fn predicted_arr(&self, row: &[f64]) -> f64 {
        self.leaf_survival(row, 1.0) - self.leaf_survival(row, 0.0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

/// Two-sample log-rank chi-square between `in_left` and its complement over
/// the rows in `order` (pre-sorted ascending by time). `None` when the
/// statistic has zero variance.
fn logrank_stat(
    data: &TrialData,
    order: &[usize],
    in_left: impl Fn(usize) -> bool,
) -> Option<f64> {
    let total = order.len();
    let mut n_left: usize = order.iter().filter(|&&i| in_left(i)).count();
    let mut n_at_risk = total;
    let mut observed_minus_expected = 0.0;
    let mut variance = 0.0;
    let mut k = 0;
    while k < total {
        let t = data.time[order[k]];
        let mut deaths = 0usize;
        let mut deaths_left = 0usize;
        let mut removed = 0usize;
        let mut removed_left = 0usize;
        while k < total && data.time[order[k]] == t {
            let i = order[k];
            let left = in_left(i);
            if data.event[i] {
                deaths += 1;
                if left {
                    deaths_left += 1;
                }
            }
            removed += 1;
            if left {
                removed_left += 1;
            }
            k += 1;
        }
        if deaths > 0 && n_at_risk > 1 {
            let n = n_at_risk as f64;
            let n1 = n_left as f64;
            let d = deaths as f64;
            observed_minus_expected += deaths_left as f64 - d * n1 / n;
            variance += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
        }
        n_at_risk -= removed;
        n_left -= removed_left;
    }
    if variance > 0.0 {
        Some(observed_minus_expected * observed_minus_expected / variance)
    } else {
        None
    }
}

struct Grower<'a> {
    data: &'a TrialData,
    horizon: f64,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn leaf(&mut self, indices: &[usize]) -> usize {
        let times: Vec<f64> = indices.iter().map(|&i| self.data.time[i]).collect();
        let events: Vec<bool> = indices.iter().map(|&i| self.data.event[i]).collect();
        let survival = kaplan_meier(&times, &events)
            .map(|km| km.eval(self.horizon))
            .unwrap_or(1.0);
        self.nodes.push(TreeNode::Leaf {
            survival,
            size: indices.len(),
        });
        self.nodes.len() - 1
    }

    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let has_events = indices.iter().any(|&i| self.data.event[i]);
        if depth >= MAX_DEPTH || indices.len() < 2 * MIN_LEAF || !has_events {
            return self.leaf(&indices);
        }

        let mut order = indices.clone();
        order.sort_by(|&a, &b| self.data.time[a].partial_cmp(&self.data.time[b]).unwrap());

        // Best split: max log-rank statistic; ties keep the earliest
        // candidate in (covariate, threshold, then treatment) order.
        let mut best: Option<(f64, TreeFeature, f64)> = None;
        let mut consider = |stat: f64, feature: TreeFeature, threshold: f64| {
            if best.as_ref().is_none_or(|b| stat > b.0) {
                best = Some((stat, feature, threshold));
            }
        };
        let p = self.data.p();
        for j in 0..p {
            for c in quantile_thresholds(self.data, &indices, j, &DECILES) {
                let left = indices.iter().filter(|&&i| self.data.x[[i, j]] <= c).count();
                if left < MIN_LEAF || indices.len() - left < MIN_LEAF {
                    continue;
                }
                if let Some(stat) = logrank_stat(self.data, &order, |i| self.data.x[[i, j]] <= c)
                {
                    consider(stat, TreeFeature::X(j), c);
                }
            }
        }
        {
            let controls = indices.iter().filter(|&&i| !self.data.w[i]).count();
            if controls >= MIN_LEAF && indices.len() - controls >= MIN_LEAF {
                if let Some(stat) = logrank_stat(self.data, &order, |i| !self.data.w[i]) {
                    consider(stat, TreeFeature::W, 0.5);
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            return self.leaf(&indices);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| match feature {
                TreeFeature::X(j) => self.data.x[[i, j]] <= threshold,
                TreeFeature::W => !self.data.w[i],
            });

        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            survival: 0.0,
            size: indices.len(),
        }); // placeholder
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[slot] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

/// Grows the tree on the full design (covariates plus treatment) and wraps
/// it as an ARR-sign classifier. No importance ranking: depth-limited
/// log-rank trees provide no per-covariate p-values to rank with.
pub(super) fn fit(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    let mut grower = Grower {
        data,
        horizon: ctx.horizon,
        nodes: Vec::new(),
    };
    let root = grower.grow((0..data.n()).collect(), 0);
    debug_assert_eq!(root, 0);
    let tree = SurvivalTree {
        nodes: grower.nodes,
        horizon: ctx.horizon,
    };
    Ok(MethodResult {
        method: MethodId::MultivariateTree,
        het_p: None,
        het_degenerate: false,
        importance: None,
        predictor: Some(SubgroupPredictor::TreeArrSign(Box::new(tree))),
        candidates: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::testutil::strong_signal_trial;
    use ndarray::Array2;

    #[test]
    fn logrank_separates_clearly_different_groups() {
        // Group A events early, group B late.
        let n = 40;
        let mut x = Array2::zeros((n, 1));
        let mut time = Vec::new();
        let mut event = Vec::new();
        let mut w = Vec::new();
        for i in 0..n {
            let early = i < n / 2;
            x[[i, 0]] = if early { 0.0 } else { 1.0 };
            time.push(if early {
                1.0 + i as f64 * 0.01
            } else {
                5.0 + i as f64 * 0.01
            });
            event.push(true);
            w.push(i % 2 == 0);
        }
        let data = TrialData {
            x,
            w,
            time,
            event,
            true_subgroup: None,
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| data.time[a].partial_cmp(&data.time[b]).unwrap());
        let strong = logrank_stat(&data, &order, |i| data.x[[i, 0]] <= 0.5).unwrap();
        assert!(strong > 20.0, "stat = {strong}");
        // A random-ish split has a far smaller statistic.
        let weak = logrank_stat(&data, &order, |i| i % 2 == 0).unwrap();
        assert!(weak < strong / 4.0, "weak = {weak}");
    }

    #[test]
    fn tree_respects_leaf_size_and_depth() {
        let (trial, _) = strong_signal_trial(500, 41);
        let res = fit(&trial, &FitContext::default()).unwrap();
        let SubgroupPredictor::TreeArrSign(tree) = res.predictor.unwrap() else {
            panic!("expected tree predictor");
        };
        assert!(tree.leaf_count() >= 2);
        for node in &tree.nodes {
            if let TreeNode::Leaf { size, .. } = node {
                assert!(*size >= MIN_LEAF, "leaf size {size}");
            }
        }
        assert!(tree.leaf_count() <= 32); // depth cap of 5
    }

    #[test]
    fn strong_subgroup_signal_yields_nonzero_arr_predictions() {
        let (trial, _) = strong_signal_trial(600, 42);
        let res = fit(&trial, &FitContext::default()).unwrap();
        let SubgroupPredictor::TreeArrSign(tree) = res.predictor.unwrap() else {
            panic!("expected tree predictor");
        };
        let nonzero = (0..trial.n())
            .filter(|&i| {
                let row: Vec<f64> = (0..trial.p()).map(|j| trial.x[[i, j]]).collect();
                tree.predicted_arr(&row) != 0.0
            })
            .count();
        assert!(nonzero > 0, "tree never split on treatment despite signal");
    }
}
