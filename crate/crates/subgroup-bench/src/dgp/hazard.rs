//! Closed-form pieces of the Weibull-baseline hazard model.
//!
//! With baseline hazard `h0(t) = t` the cumulative baseline is `t^2 / 2`, so
//! survival given a linear predictor `lp` is `exp(-exp(lp) * t^2 / 2)` and
//! event times invert in closed form from a uniform draw.

use rand::Rng;

/// Linear predictor `beta0*W + (beta1 - beta0)*G*W + gamma' X`, expressed in
/// terms of the precomputed prognostic score `gamma_x = gamma' X`.
pub fn linear_predictor(gamma_x: f64, w: bool, g: bool, beta0: f64, beta1: f64) -> f64 {
    let treatment = if w {
        if g {
            beta1
        } else {
            beta0
        }
    } else {
        0.0
    };
    treatment + gamma_x
}

/// Survival probability at time `t` for linear predictor `lp`:
/// `S(t | lp) = exp(-exp(lp) * t^2 / 2)`.
pub fn survival_at(t: f64, lp: f64) -> f64 {
    (-lp.exp() * t * t / 2.0).exp()
}

/// Draws an event time by inverse transform:
/// `T = sqrt(-2 * ln(U) * exp(-lp))`, redrawing the measure-zero `U = 0`.
pub fn sample_event_time(lp: f64, rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return (-2.0 * u.ln() * (-lp).exp()).sqrt();
        }
    }
}

/// A subject's own absolute risk reduction at time `t`: survival if treated
/// minus survival if untreated, given the prognostic score and (true)
/// subgroup membership.
pub fn individual_arr(t: f64, gamma_x: f64, g: bool, beta0: f64, beta1: f64) -> f64 {
    let lp_treated = linear_predictor(gamma_x, true, g, beta0, beta1);
    let lp_control = linear_predictor(gamma_x, false, g, beta0, beta1);
    survival_at(t, lp_treated) - survival_at(t, lp_control)
}
