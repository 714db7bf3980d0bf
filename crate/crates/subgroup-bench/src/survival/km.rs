//! Kaplan-Meier product-limit estimator.

use crate::error::Error;
use crate::Result;

/// A right-continuous step function for survival probability.
///
/// Steps occur only at event times. Before the first step the curve is 1.
#[derive(Debug, Clone)]
pub struct SurvivalCurve {
    /// Distinct event times, ascending.
    times: Vec<f64>,
    /// Curve value at and after each time in `times`.
    survival: Vec<f64>,
}

impl SurvivalCurve {
    /// The constant curve S(t) = 1 (no events observed).
    pub fn all_ones() -> SurvivalCurve {
        SurvivalCurve {
            times: Vec::new(),
            survival: Vec::new(),
        }
    }

    /// Evaluates S(t). Right-continuous: at a step time the new value applies.
    pub fn eval(&self, t: f64) -> f64 {
        // partition_point gives the count of step times <= t.
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    /// Step times (ascending) paired with the curve value from each time on.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.survival.iter().copied())
    }
}

/// Kaplan-Meier estimate from observed times and event indicators.
///
/// Ties follow the standard convention: subjects censored at time t remain in
/// the risk set for events at t. All-censored input yields the constant
/// curve S = 1. Times must be finite and nonnegative.
pub fn kaplan_meier(times: &[f64], events: &[bool]) -> Result<SurvivalCurve> {
    if times.len() != events.len() {
        return Err(Error::validation("times and events differ in length"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::validation("times must be finite and nonnegative"));
    }
    let n = times.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());

    let mut curve_times = Vec::new();
    let mut curve_surv = Vec::new();
    let mut s = 1.0;
    let mut at_risk = n;
    let mut i = 0;
    while i < n {
        let t = times[order[i]];
        // Count events and total removals at this exact time.
        let mut deaths = 0usize;
        let mut removed = 0usize;
        while i < n && times[order[i]] == t {
            if events[order[i]] {
                deaths += 1;
            }
            removed += 1;
            i += 1;
        }
        if deaths > 0 {
            s *= 1.0 - deaths as f64 / at_risk as f64;
            curve_times.push(t);
            curve_surv.push(s);
        }
        at_risk -= removed;
    }
    Ok(SurvivalCurve {
        times: curve_times,
        survival: curve_surv,
    })
}
