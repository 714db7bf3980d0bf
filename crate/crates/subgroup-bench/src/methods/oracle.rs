//! Oracle baseline: tests the true subgroup's interaction directly.

use ndarray::Array2;

use crate::data::TrialData;
use crate::error::Error;
use crate::survival::{fit_cox, CoxOptions};
use crate::Result;

use super::{FitContext, MethodId, MethodResult, SubgroupPredictor, ThresholdRule};

/// Fits `Cox(G, W, G*W)` with the true membership indicator and reports the
/// interaction Wald p-value. The predictor is the generating rule itself, so
/// oracle accuracy measures only label noise, not discovery.
pub(super) fn fit(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    let def = ctx.oracle.ok_or_else(|| {
        Error::validation("oracle needs the generating subgroup definition in the fit context")
    })?;
    let n = data.n();
    let mut design = Array2::zeros((n, 3));
    let mut row = vec![0.0; data.p()];
    for i in 0..n {
        for j in 0..data.p() {
            row[j] = data.x[[i, j]];
        }
        let g = if def.contains(&row) { 1.0 } else { 0.0 };
        let w = if data.w[i] { 1.0 } else { 0.0 };
        design[[i, 0]] = g;
        design[[i, 1]] = w;
        design[[i, 2]] = g * w;
    }
    let fit = fit_cox(design.view(), &data.time, &data.event, &CoxOptions::unpenalized())?;
    let het_p = fit.p_values[2];

    let mut importance = vec![0.0; data.p()];
    for v in def.variables() {
        importance[v] = 1.0;
    }
    let rule = ThresholdRule {
        clauses: def.clauses.clone(),
        positive: true,
    };
    Ok(MethodResult {
        method: MethodId::Oracle,
        het_p: Some(het_p),
        het_degenerate: false,
        importance: Some(importance),
        predictor: Some(SubgroupPredictor::Rule(rule)),
        candidates: Vec::new(),
    })
}
