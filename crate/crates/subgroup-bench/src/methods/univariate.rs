//! Univariate screens: one test per covariate with Bonferroni adjustment.

use ndarray::Array2;
use rand::Rng;

use crate::data::TrialData;
use crate::error::Error;
use crate::survival::{diff_in_diff_test, fit_cox, CoxOptions};
use crate::Result;

use super::{
    importance_from_pvalues, median_split_rule, FitContext, MethodId, MethodResult,
    SubgroupPredictor,
};

/// Shared tail: Bonferroni-adjust the per-covariate p-values, rank by them,
/// and build a median-split predictor on the winner.
fn assemble(
    method: MethodId,
    data: &TrialData,
    ctx: &FitContext,
    pvalues: Vec<f64>,
    winner_degenerate: bool,
) -> MethodResult {
    let p = pvalues.len();
    let mut best = 0;
    for j in 1..p {
        if pvalues[j] < pvalues[best] {
            best = j;
        }
    }
    let het_p = (pvalues[best] * p as f64).min(1.0);
    let rule = median_split_rule(data, best, ctx.horizon);
    MethodResult {
        method,
        het_p: Some(het_p),
        het_degenerate: winner_degenerate,
        importance: Some(importance_from_pvalues(&pvalues)),
        predictor: Some(SubgroupPredictor::Rule(rule)),
        candidates: Vec::new(),
    }
}

/// Per covariate, fits `Cox(X_j, W, X_j*W)` and records the Wald p-value of
/// the interaction term. Covariates whose fit fails score p = 1.
pub(super) fn fit_interaction(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    if !data.event.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    let n = data.n();
    let p = data.p();
    let mut pvalues = Vec::with_capacity(p);
    let mut design = Array2::zeros((n, 3));
    for j in 0..p {
        for i in 0..n {
            let xj = data.x[[i, j]];
            let w = if data.w[i] { 1.0 } else { 0.0 };
            design[[i, 0]] = xj;
            design[[i, 1]] = w;
            design[[i, 2]] = xj * w;
        }
        let pj = match fit_cox(design.view(), &data.time, &data.event, &CoxOptions::unpenalized())
        {
            Ok(fit) => fit.p_values[2],
            Err(_) => 1.0,
        };
        pvalues.push(pj);
    }
    Ok(assemble(
        MethodId::UnivariateInteraction,
        data,
        ctx,
        pvalues,
        false,
    ))
}

/// Per covariate, median-splits the sample and runs the
/// difference-in-differences test on observed times across (split, arm).
pub(super) fn fit_ttest(
    data: &TrialData,
    ctx: &FitContext,
    rng: &mut impl Rng,
) -> Result<MethodResult> {
    let n = data.n();
    let p = data.p();
    let mut pvalues = Vec::with_capacity(p);
    let mut degenerate = Vec::with_capacity(p);
    let mut col = vec![0.0; n];
    for j in 0..p {
        for i in 0..n {
            col[i] = data.x[[i, j]];
        }
        let med = crate::stats::median(&col);
        let split: Vec<bool> = col.iter().map(|&v| v >= med).collect();
        let test = diff_in_diff_test(&data.time, &data.w, &split, rng);
        pvalues.push(test.p_value);
        degenerate.push(test.degenerate);
    }
    let mut best = 0;
    for j in 1..p {
        if pvalues[j] < pvalues[best] {
            best = j;
        }
    }
    let winner_degenerate = degenerate[best];
    Ok(assemble(
        MethodId::UnivariateTTest,
        data,
        ctx,
        pvalues,
        winner_degenerate,
    ))
}
