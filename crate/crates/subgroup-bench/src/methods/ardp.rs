//! Adaptive risk-difference peeling: shrink a box around the best responders
//! by repeatedly trimming the 5% tail (of some covariate, from either end)
//! whose removal most improves the treatment benefit inside the box.

use crate::data::TrialData;
use crate::dgp::{Direction, SubgroupClause};
use crate::Result;

use super::{
    rule_order_importance, treatment_z, FitContext, MethodId, MethodResult, SubgroupPredictor,
    ThresholdRule,
};

/// Fraction of current members peeled per step.
const PEEL_FRACTION: f64 = 0.05;
/// The box never shrinks below this share of the sample.
const FLOOR_FRACTION: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    Low,
    High,
}

pub(super) fn fit(data: &TrialData, ctx: &FitContext) -> Result<MethodResult> {
    let _ = ctx;
    let n = data.n();
    let p = data.p();
    let floor = ((FLOOR_FRACTION * n as f64).ceil() as usize).max(2);

    let mut members: Vec<usize> = (0..n).collect();
    // Accumulated box bounds per covariate, plus first-appearance order.
    let mut lower: Vec<Option<f64>> = vec![None; p];
    let mut upper: Vec<Option<f64>> = vec![None; p];
    let mut var_order: Vec<usize> = Vec::new();

    loop {
        let k = ((PEEL_FRACTION * members.len() as f64).ceil() as usize).max(1);
        if members.len() < k || members.len() - k < floor {
            break;
        }

        // Best peel: maximize the post-peel treatment benefit (negated Wald
        // z of Cox(W) on the survivors). Scan order breaks ties.
        let mut best: Option<(f64, usize, Tail, Vec<usize>)> = None;
        let mut sorted = members.clone();
        for j in 0..p {
            sorted.sort_by(|&a, &b| {
                data.x[[a, j]]
                    .partial_cmp(&data.x[[b, j]])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            for tail in [Tail::Low, Tail::High] {
                let survivors: Vec<usize> = match tail {
                    Tail::Low => sorted[k..].to_vec(),
                    Tail::High => sorted[..sorted.len() - k].to_vec(),
                };
                let Some(z) = treatment_z(data, &survivors) else {
                    continue;
                };
                let benefit = -z;
                if best.as_ref().is_none_or(|b| benefit > b.0) {
                    best = Some((benefit, j, tail, survivors));
                }
            }
        }
        let Some((_, j, tail, survivors)) = best else {
            break;
        };

        // Update the box: the new bound is the surviving extreme value.
        let bound = survivors
            .iter()
            .map(|&i| data.x[[i, j]])
            .fold(
                match tail {
                    Tail::Low => f64::INFINITY,
                    Tail::High => f64::NEG_INFINITY,
                },
                match tail {
                    Tail::Low => f64::min,
                    Tail::High => f64::max,
                },
            );
        match tail {
            Tail::Low => lower[j] = Some(bound),
            Tail::High => upper[j] = Some(bound),
        }
        if !var_order.contains(&j) {
            var_order.push(j);
        }
        members = survivors;
    }

    // Box to rule: bounds in first-appearance order, lower before upper.
    let mut clauses = Vec::new();
    for &j in &var_order {
        if let Some(lo) = lower[j] {
            clauses.push(SubgroupClause {
                var: j,
                direction: Direction::Ge,
                threshold: lo,
            });
        }
        if let Some(hi) = upper[j] {
            clauses.push(SubgroupClause {
                var: j,
                direction: Direction::Le,
                threshold: hi,
            });
        }
    }
    let rule = ThresholdRule {
        clauses,
        positive: true,
    };

    Ok(MethodResult {
        method: MethodId::Ardp,
        het_p: None,
        het_degenerate: false,
        importance: Some(rule_order_importance(p, &var_order)),
        predictor: Some(SubgroupPredictor::Rule(rule)),
        candidates: Vec::new(),
    })
}
