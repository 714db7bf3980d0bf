//! Sequential bump hunting with an interaction test: greedily grow a
//! conjunctive rule one threshold clause at a time, accepting a clause only
//! when it strictly improves the treatment-by-rule interaction p-value.

use ndarray::Array2;

use crate::data::TrialData;
use crate::dgp::{Direction, SubgroupClause};
use crate::error::Error;
use crate::survival::{fit_cox, CoxOptions};
use crate::Result;

use super::{
    km_arr, quantile_thresholds, rule_order_importance, FitContext, MethodId, MethodResult,
    SubgroupPredictor, ThresholdRule,
};

const MAX_CLAUSES: usize = 4;
const MIN_SUBGROUP: usize = 30;
const QUANTILES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
const MAX_P: usize = 30;

/// Wald p-value of the rule-by-treatment interaction in `Cox(W, I, I*W)` on
/// the full sample, where `I` marks membership in the candidate rule.
fn interaction_p(data: &TrialData, members: &[usize]) -> Option<f64> {
    let n = data.n();
    let mut indicator = vec![0.0; n];
    for &i in members {
        indicator[i] = 1.0;
    }
    let mut design = Array2::zeros((n, 3));
    for i in 0..n {
        let w = if data.w[i] { 1.0 } else { 0.0 };
        design[[i, 0]] = w;
        design[[i, 1]] = indicator[i];
        design[[i, 2]] = indicator[i] * w;
    }
    let fit = fit_cox(design.view(), &data.time, &data.event, &CoxOptions::unpenalized()).ok()?;
    if fit.frozen[2] || !fit.standard_errors[2].is_finite() {
        return None;
    }
    Some(fit.p_values[2])
}

pub(super) fn fit(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    if data.p() > MAX_P && !ctx.force_high_dim {
        return Err(Error::validation(format!(
            "seqbt scans every covariate-threshold-direction triple and is limited \
             to {MAX_P} covariates; enable force_high_dim to override"
        )));
    }

    let n = data.n();
    let mut members: Vec<usize> = (0..n).collect();
    let mut clauses: Vec<SubgroupClause> = Vec::new();
    let mut incumbent_p = f64::INFINITY;

    while clauses.len() < MAX_CLAUSES {
        // Candidate extensions: thresholds are quantiles of the covariate
        // within the current subgroup, in both directions.
        let mut best: Option<(f64, SubgroupClause, Vec<usize>)> = None;
        for j in 0..data.p() {
            for c in quantile_thresholds(data, &members, j, &QUANTILES) {
                for direction in [Direction::Le, Direction::Ge] {
                    let clause = SubgroupClause {
                        var: j,
                        direction,
                        threshold: c,
                    };
                    let refined: Vec<usize> = members
                        .iter()
                        .copied()
                        .filter(|&i| {
                            let v = data.x[[i, j]];
                            match direction {
                                Direction::Le => v <= c,
                                Direction::Ge => v >= c,
                                Direction::Gt => v > c,
                                Direction::Lt => v < c,
                            }
                        })
                        .collect();
                    if refined.len() < MIN_SUBGROUP
                        || refined.len() == members.len()
                        || refined.len() == n
                    {
                        continue;
                    }
                    let Some(pv) = interaction_p(data, &refined) else {
                        continue;
                    };
                    if best.as_ref().is_none_or(|b| pv < b.0) {
                        best = Some((pv, clause, refined));
                    }
                }
            }
        }
        let Some((pv, clause, refined)) = best else {
            break;
        };
        if pv >= incumbent_p {
            break; // no strict improvement left
        }
        incumbent_p = pv;
        clauses.push(clause);
        members = refined;
    }

    if clauses.is_empty() {
        return Ok(MethodResult {
            method: MethodId::SeqBt,
            het_p: None,
            het_degenerate: false,
            importance: Some(vec![0.0; data.p()]),
            predictor: None,
            candidates: Vec::new(),
        });
    }

    // Orient the rule toward the side with the better observed ARR.
    let inside = members;
    let outside: Vec<usize> = {
        let mut mask = vec![true; n];
        for &i in &inside {
            mask[i] = false;
        }
        (0..n).filter(|&i| mask[i]).collect()
    };
    let arr_in = km_arr(data, &inside, ctx.horizon).unwrap_or(f64::NEG_INFINITY);
    let arr_out = km_arr(data, &outside, ctx.horizon).unwrap_or(f64::NEG_INFINITY);
    let ordered_vars: Vec<usize> = {
        let mut seen = Vec::new();
        for cl in &clauses {
            if !seen.contains(&cl.var) {
                seen.push(cl.var);
            }
        }
        seen
    };
    let rule = ThresholdRule {
        clauses,
        positive: arr_in >= arr_out,
    };

    Ok(MethodResult {
        method: MethodId::SeqBt,
        het_p: None,
        het_degenerate: false,
        importance: Some(rule_order_importance(data.p(), &ordered_vars)),
        predictor: Some(SubgroupPredictor::Rule(rule)),
        candidates: Vec::new(),
    })
}
