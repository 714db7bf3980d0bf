//! Model-based recursive partitioning: a treatment-only Cox model per node,
//! parameter-instability tests against each covariate, and loglik-guided
//! splits where instability is significant.

use ndarray::Array2;

use crate::data::TrialData;
use crate::stats::{pearson, t_two_sided_p};
use crate::survival::{cox_score_residuals, fit_cox, CoxFit, CoxOptions};
use crate::Result;

use super::partition::{make_leaf, PartitionNode, PartitionTree};
use super::{quantile_thresholds, FitContext, MethodId, MethodResult, SubgroupPredictor};

const MAX_DEPTH: usize = 3;
const MIN_CHILD: usize = 50;
const DECILES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Cox(W) on a row subset, or `None` when it cannot be fit there.
fn fit_treatment_model(data: &TrialData, indices: &[usize]) -> Option<(CoxFit, Array2<f64>, Vec<f64>, Vec<bool>)> {
    let mut x = Array2::zeros((indices.len(), 1));
    let mut times = Vec::with_capacity(indices.len());
    let mut events = Vec::with_capacity(indices.len());
    for (r, &i) in indices.iter().enumerate() {
        x[[r, 0]] = if data.w[i] { 1.0 } else { 0.0 };
        times.push(data.time[i]);
        events.push(data.event[i]);
    }
    let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).ok()?;
    Some((fit, x, times, events))
}

/// The node-level instability screen: correlation of the treatment-score
/// residuals with each covariate, each referred to a t distribution, then
/// Bonferroni over the p covariates. Returns the per-covariate p-values.
fn instability_pvalues(data: &TrialData, indices: &[usize]) -> Option<Vec<f64>> {
    let (fit, x, times, events) = fit_treatment_model(data, indices)?;
    if fit.frozen[0] {
        return None; // single-arm node: no treatment model to destabilize
    }
    let residuals = cox_score_residuals(x.view(), &times, &events, &fit, 0);
    let m = indices.len();
    if m < 3 {
        return None;
    }
    let p = data.p();
    let mut pvalues = Vec::with_capacity(p);
    let mut col = vec![0.0; m];
    for j in 0..p {
        for (r, &i) in indices.iter().enumerate() {
            col[r] = data.x[[i, j]];
        }
        let r = pearson(&residuals, &col);
        let pj = if r.abs() >= 1.0 {
            0.0
        } else {
            let t = r * ((m - 2) as f64 / (1.0 - r * r)).sqrt();
            t_two_sided_p(t, (m - 2) as f64)
        };
        pvalues.push(pj);
    }
    Some(pvalues)
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
        let tested = instability_pvalues(self.data, &indices);
        let at_root = depth == 0;
        let Some(pvalues) = tested else {
            if at_root {
                self.root_p = None;
            }
            return self.push_leaf(&indices);
        };
        let mut best = 0;
        for j in 1..p {
            if pvalues[j] < pvalues[best] {
                best = j;
            }
        }
        let p_adjusted = (pvalues[best] * p as f64).min(1.0);
        if at_root {
            self.root_p = Some(p_adjusted);
        }
        if p_adjusted >= self.ctx.alpha || depth >= MAX_DEPTH {
            return self.push_leaf(&indices);
        }

        // Threshold search on the chosen covariate: maximize the summed
        // child treatment-model log-likelihoods over within-node deciles.
        let mut split: Option<(f64, f64)> = None; // (score, threshold)
        for c in quantile_thresholds(self.data, &indices, best, &DECILES) {
            let (l, r): (Vec<usize>, Vec<usize>) =
                indices.iter().partition(|&&i| self.data.x[[i, best]] <= c);
            if l.len() < MIN_CHILD || r.len() < MIN_CHILD {
                continue;
            }
            let Some((lf, ..)) = fit_treatment_model(self.data, &l) else {
                continue;
            };
            let Some((rf, ..)) = fit_treatment_model(self.data, &r) else {
                continue;
            };
            let score = lf.log_likelihood + rf.log_likelihood;
            if split.as_ref().is_none_or(|s| score > s.0) {
                split = Some((score, c));
            }
        }
        let Some((_, threshold)) = split else {
            return self.push_leaf(&indices);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.data.x[[i, best]] <= threshold);

        let slot = self.nodes.len();
        self.nodes.push(PartitionNode::Leaf { size: 0, arr: None }); // placeholder
        let size = indices.len();
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = PartitionNode::Split {
            var: best,
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

/// Heterogeneity evidence is the root instability test; the predictor is the
/// best-ARR leaf's path rule. A root that cannot be tested (no events, one
/// arm) scores p = 1 with no predictor.
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
    let predictor = tree
        .best_leaf_rule()
        .map(SubgroupPredictor::Rule);
    Ok(MethodResult {
        method: MethodId::Mob,
        het_p: Some(het_p),
        het_degenerate: false,
        importance: Some(importance),
        predictor,
        candidates: Vec::new(),
    })
}
