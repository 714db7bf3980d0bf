//! Interaction trees: each node screens candidate binary splits by the Wald
//! p-value of the split-by-treatment interaction in a small Cox model, and
//! splits where the Bonferroni-adjusted best candidate is significant.

use ndarray::Array2;

use crate::data::TrialData;
use crate::survival::{fit_cox, CoxOptions};
use crate::Result;

use super::partition::{make_leaf, PartitionNode, PartitionTree};
use super::{quantile_thresholds, FitContext, MethodId, MethodResult, SubgroupPredictor};

const MAX_DEPTH: usize = 3;
const MIN_CHILD: usize = 50;
const QUANTILES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Wald p-value of the interaction in `Cox(W, Z, Z*W)` over the node's rows,
/// where `Z = 1{x_j <= c}`. `None` when the model cannot be fit or the
/// interaction column is degenerate there.
fn interaction_p(data: &TrialData, indices: &[usize], j: usize, c: f64) -> Option<f64> {
    let m = indices.len();
    let mut design = Array2::zeros((m, 3));
    let mut times = Vec::with_capacity(m);
    let mut events = Vec::with_capacity(m);
    for (r, &i) in indices.iter().enumerate() {
        let w = if data.w[i] { 1.0 } else { 0.0 };
        let z = if data.x[[i, j]] <= c { 1.0 } else { 0.0 };
        design[[r, 0]] = w;
        design[[r, 1]] = z;
        design[[r, 2]] = z * w;
        times.push(data.time[i]);
        events.push(data.event[i]);
    }
    let fit = fit_cox(design.view(), &times, &events, &CoxOptions::unpenalized()).ok()?;
    if fit.frozen[2] || !fit.standard_errors[2].is_finite() {
        return None;
    }
    Some(fit.p_values[2])
}

struct Grower<'a> {
    data: &'a TrialData,
    ctx: &'a FitContext<'a>,
    nodes: Vec<PartitionNode>,
    root_p: Option<f64>,
}

impl Grower<'_> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let p = self.data.p();
        // Best admissible candidate: smallest interaction p, ties broken by
        // earlier covariate then smaller threshold (the scan order).
        let mut best: Option<(f64, usize, f64)> = None;
        for j in 0..p {
            for c in quantile_thresholds(self.data, &indices, j, &QUANTILES) {
                let left = indices
                    .iter()
                    .filter(|&&i| self.data.x[[i, j]] <= c)
                    .count();
                if left < MIN_CHILD || indices.len() - left < MIN_CHILD {
                    continue;
                }
                let Some(pv) = interaction_p(self.data, &indices, j, c) else {
                    continue;
                };
                if best.as_ref().is_none_or(|b| pv < b.0) {
                    best = Some((pv, j, c));
                }
            }
        }

        let at_root = depth == 0;
        let Some((p_raw, var, threshold)) = best else {
            if at_root {
                self.root_p = None;
            }
            return self.push_leaf(&indices);
        };
        // Bonferroni over the full candidate grid: p covariates times the
        // number of quantile levels scanned per covariate.
        let p_adjusted = (p_raw * (p * QUANTILES.len()) as f64).min(1.0);
        if at_root {
            self.root_p = Some(p_adjusted);
        }
        if p_adjusted >= self.ctx.alpha || depth >= MAX_DEPTH {
            return self.push_leaf(&indices);
        }

        let (l, r): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.data.x[[i, var]] <= threshold);
        let slot = self.nodes.len();
        self.nodes.push(PartitionNode::Leaf { size: 0, arr: None });
        let size = indices.len();
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = PartitionNode::Split {
            var,
            threshold,
            p_adjusted,
            size,
            left,
            right,
        };
        slot
    }

    fn push_leaf(&mut self, indices: &[usize]) -> usize {
        self.nodes
            .push(make_leaf(self.data, indices, self.ctx.horizon));
        self.nodes.len() - 1
    }
}

/// Heterogeneity evidence is the root's adjusted best-candidate p-value; a
/// root with no testable candidate scores p = 1 with no predictor.
pub(super) fn fit(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    let mut grower = Grower {
        data,
        ctx,
        nodes: Vec::new(),
        root_p: None,
    };
    let root = grower.grow((0..data.n()).collect(), 0);
    debug_assert_eq!(root, 0);
    let tree = PartitionTree {
        nodes: grower.nodes,
    };
    let het_p = grower.root_p.unwrap_or(1.0);
    let importance = tree.feature_importance(data.p());
    let predictor = tree.best_leaf_rule().map(SubgroupPredictor::Rule);
    Ok(MethodResult {
        method: MethodId::ITree,
        het_p: Some(het_p),
        het_degenerate: false,
        importance: Some(importance),
        predictor,
        candidates: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::testutil::{null_trial, strong_signal_trial};

    #[test]
    fn splits_on_a_subgroup_variable_under_signal() {
        let (trial, def) = strong_signal_trial(500, 13);
        let res = fit(&trial, &FitContext::default()).unwrap();
        assert!(res.het_p.unwrap() < 0.01, "het_p = {:?}", res.het_p);
        let imp = res.importance.unwrap();
        let top = (0..20)
            .max_by(|&a, &b| imp[a].partial_cmp(&imp[b]).unwrap())
            .unwrap();
        assert!(def.variables().contains(&top), "top var x{}", top + 1);
        let rule = res.predictor.expect("tree should split");
        // The best leaf should prefer the inside of the subgroup.
        let desc = rule.description();
        assert!(!desc.is_empty());
    }

    #[test]
    fn null_data_rarely_rejects_and_keeps_p_in_range() {
        let (trial, _) = null_trial(500, 62);
        let res = fit(&trial, &FitContext::default()).unwrap();
        let p = res.het_p.unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn tiny_nodes_produce_an_untestable_root() {
        let (trial, _) = null_trial(60, 63); // below 2 * MIN_CHILD
        let res = fit(&trial, &FitContext::default()).unwrap();
        assert_eq!(res.het_p, Some(1.0));
        assert!(res.predictor.is_none());
        assert!(res.importance.unwrap().iter().all(|&v| v == 0.0));
    }
}
