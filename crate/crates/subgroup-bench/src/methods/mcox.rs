//! Multivariate Cox with all treatment interactions, ridge-stabilized.

use ndarray::Array2;

use crate::data::TrialData;
use crate::survival::{fit_cox, CoxFit, CoxOptions};
use crate::Result;

use super::{importance_from_pvalues, FitContext, MethodId, MethodResult, SubgroupPredictor};

/// Ridge weight on the covariate and interaction blocks. The treatment main
/// effect stays unpenalized so the overall effect estimate is untouched.
const RIDGE: f64 = 0.1;

/// A fitted `Cox(W, X, W*X)` model evaluated as an ARR classifier.
#[derive(Debug, Clone)]
pub struct CoxArrModel {
    pub fit: CoxFit,
    pub horizon: f64,
}

impl CoxArrModel {
    fn features(row: &[f64], w: f64) -> Vec<f64> {
        let p = row.len();
        let mut f = Vec::with_capacity(2 * p + 1);
        f.push(w);
        f.extend_from_slice(row);
        f.extend(row.iter().map(|&v| v * w));
        f
    }

    /// Model-based ARR at the horizon: predicted survival treated minus
    /// predicted survival untreated.
    pub fn predicted_arr(&self, row: &[f64]) -> f64 {
        let s1 = self.fit.predict_survival(self.horizon, &Self::features(row, 1.0));
        let s0 = self.fit.predict_survival(self.horizon, &Self::features(row, 0.0));
        s1 - s0
    }
}

/// Design is `[W, X1..Xp, W*X1..W*Xp]`; importance ranks covariates by the
/// Wald p-values of their interaction columns.
pub(super) fn fit(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    let n = data.n();
    let p = data.p();
    let mut design = Array2::zeros((n, 2 * p + 1));
    for i in 0..n {
        let w = if data.w[i] { 1.0 } else { 0.0 };
        design[[i, 0]] = w;
        for j in 0..p {
            let xj = data.x[[i, j]];
            design[[i, 1 + j]] = xj;
            design[[i, 1 + p + j]] = xj * w;
        }
    }
    let mut penalize = vec![true; 2 * p + 1];
    penalize[0] = false;
    let fit = fit_cox(
        design.view(),
        &data.time,
        &data.event,
        &CoxOptions::ridged(RIDGE, penalize),
    )?;

    let interaction_p: Vec<f64> = (0..p).map(|j| fit.p_values[1 + p + j]).collect();
    let importance = importance_from_pvalues(&interaction_p);
    let model = CoxArrModel {
        fit,
        horizon: ctx.horizon,
    };
    Ok(MethodResult {
        method: MethodId::MultivariateCox,
        het_p: None,
        het_degenerate: false,
        importance: Some(importance),
        predictor: Some(SubgroupPredictor::CoxArrSign(Box::new(model))),
        candidates: Vec::new(),
    })
}
