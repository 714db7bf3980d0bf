//! Cox proportional-hazards regression with Breslow tie handling, optional
//! ridge penalty on selected columns, and a Breslow baseline hazard.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::Error;
use crate::stats::normal_two_sided_p;
use crate::survival::linalg::{solve_spd_with_jitter, Cholesky};
use crate::Result;

/// Options for [`fit_cox`].
#[derive(Debug, Clone)]
pub struct CoxOptions {
    /// Ridge penalty weight; 0 disables the penalty.
    pub ridge: f64,
    /// Which columns the ridge applies to. `None` penalizes every column
    /// (only relevant when `ridge > 0`).
    pub penalize: Option<Vec<bool>>,
    /// Newton-Raphson iteration cap.
    pub max_iter: usize,
    /// Convergence tolerance on the max-norm of the (penalized) gradient.
    pub tol: f64,
}

impl Default for CoxOptions {
    fn default() -> Self {
        CoxOptions {
            ridge: 0.0,
            penalize: None,
            max_iter: 100,
            tol: 1e-7,
        }
    }
}

impl CoxOptions {
    /// Unpenalized fit with default iteration settings.
    pub fn unpenalized() -> Self {
        CoxOptions::default()
    }

    /// Ridge fit with the given weight applied to the masked columns.
    pub fn ridged(ridge: f64, penalize: Vec<bool>) -> Self {
        CoxOptions {
            ridge,
            penalize: Some(penalize),
            ..CoxOptions::default()
        }
    }
}

/// A fitted Cox model.
#[derive(Debug, Clone)]
pub struct CoxFit {
    /// One coefficient per design column; frozen (constant) columns get 0.
    pub coefficients: Vec<f64>,
    /// Wald standard errors; infinite for frozen columns.
    pub standard_errors: Vec<f64>,
    /// Two-sided Wald p-values; 1 for frozen columns.
    pub p_values: Vec<f64>,
    /// Whether the gradient dropped below tolerance within the iteration cap.
    pub converged: bool,
    /// Newton iterations performed.
    pub iterations: usize,
    /// Unpenalized Breslow partial log-likelihood at the estimate.
    pub log_likelihood: f64,
    /// Columns that were constant in the data and excluded from the fit.
    pub frozen: Vec<bool>,
    baseline_times: Vec<f64>,
    baseline_cumhaz: Vec<f64>,
}

impl CoxFit {
    /// Linear predictor for one covariate row (same column order as the fit).
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.coefficients.len());
        x.iter()
            .zip(&self.coefficients)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Breslow cumulative baseline hazard at time `t` (0 before the first
    /// event time, step function after).
    pub fn baseline_cumhaz(&self, t: f64) -> f64 {
        let k = self.baseline_times.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.baseline_cumhaz[k - 1]
        }
    }

    /// Predicted survival probability at `t` for covariate row `x`:
    /// `exp(-Lambda0(t) * exp(beta' x))`.
    pub fn predict_survival(&self, t: f64, x: &[f64]) -> f64 {
        let lp = self.linear_predictor(x);
        (-self.baseline_cumhaz(t) * lp.exp()).exp()
    }

    /// Wald z statistic for one column; 0 for frozen columns.
    pub fn z_statistic(&self, j: usize) -> f64 {
        if self.frozen[j] || !self.standard_errors[j].is_finite() {
            0.0
        } else {
            self.coefficients[j] / self.standard_errors[j]
        }
    }
}

/// One pass over the risk sets: Breslow partial log-likelihood, and when
/// `full` is set, also the gradient and observed information on the active
/// columns.
struct Scan {
    loglik: f64,
    grad: Array1<f64>,
    info: Array2<f64>,
}

fn scan(
    x: ArrayView2<f64>,
    times: &[f64],
    events: &[bool],
    order_asc: &[usize],
    active: &[usize],
    beta: &Array1<f64>,
    full: bool,
) -> Scan {
    let n = times.len();
    let qa = active.len();
    // Linear predictors, centered by the max for overflow-safe exponentials.
    // The centering constant cancels exactly in the log-likelihood.
    let mut lp = vec![0.0; n];
    for i in 0..n {
        let mut v = 0.0;
        for (a, &j) in active.iter().enumerate() {
            v += x[[i, j]] * beta[a];
        }
        lp[i] = v;
    }
    let m = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = if m.is_finite() { m } else { 0.0 };

    let mut s0 = 0.0;
    let mut s1 = vec![0.0; qa];
    let mut s2 = Array2::<f64>::zeros((qa, qa));
    let mut loglik = 0.0;
    let mut grad = Array1::<f64>::zeros(qa);
    let mut info = Array2::<f64>::zeros((qa, qa));

    // Walk times descending so the risk-set sums grow incrementally.
    let mut i = n;
    while i > 0 {
        // Group the (descending) block of equal times.
        let t = times[order_asc[i - 1]];
        let mut lo = i;
        while lo > 0 && times[order_asc[lo - 1]] == t {
            lo -= 1;
        }
        // Everyone at this time enters the risk set before events are scored.
        for &idx in &order_asc[lo..i] {
            let e = (lp[idx] - m).exp();
            s0 += e;
            if full || events[idx] {
                // s1/s2 are only needed for gradients; skip for loglik-only
                // scans unless this block has events (s1 unused then anyway).
            }
            if full {
                for (a, &ja) in active.iter().enumerate() {
                    let xa = x[[idx, ja]];
                    s1[a] += e * xa;
                    for (b, &jb) in active.iter().enumerate().take(a + 1) {
                        s2[[a, b]] += e * xa * x[[idx, jb]];
                    }
                }
            }
        }
        // Score the events in this block.
        let mut deaths = 0usize;
        for &idx in &order_asc[lo..i] {
            if events[idx] {
                deaths += 1;
                loglik += lp[idx] - m;
                if full {
                    for (a, &ja) in active.iter().enumerate() {
                        grad[a] += x[[idx, ja]];
                    }
                }
            }
        }
        if deaths > 0 {
            let d = deaths as f64;
            loglik -= d * s0.ln();
            if full {
                for a in 0..qa {
                    let xbar_a = s1[a] / s0;
                    grad[a] -= d * xbar_a;
                    for b in 0..=a {
                        let v = d * (s2[[a, b]] / s0 - xbar_a * (s1[b] / s0));
                        info[[a, b]] += v;
                        if a != b {
                            info[[b, a]] += v;
                        }
                    }
                }
            }
        }
        i = lo;
    }
    Scan { loglik, grad, info }
}

/// Fits a Cox proportional-hazards model by penalized Breslow partial
/// likelihood with Newton-Raphson and step-halving.
///
/// Columns that are constant in the data are frozen at coefficient 0 with
/// p-value 1 and excluded from the Newton system. Requires at least one
/// observed event ([`Error::NoEvents`] otherwise).
pub fn fit_cox(
    x: ArrayView2<f64>,
    times: &[f64],
    events: &[bool],
    opts: &CoxOptions,
) -> Result<CoxFit> {
    let n = times.len();
    let q = x.ncols();
    if x.nrows() != n || events.len() != n {
        return Err(Error::validation("design, times, events differ in length"));
    }
    if n == 0 {
        return Err(Error::validation("empty data"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::validation("times must be finite and nonnegative"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("design must be finite"));
    }
    if !events.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    if let Some(mask) = &opts.penalize {
        if mask.len() != q {
            return Err(Error::validation("penalty mask length mismatch"));
        }
    }

    // Freeze constant columns.
    let mut frozen = vec![false; q];
    for j in 0..q {
        let col = x.column(j);
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            frozen[j] = true;
        }
    }
    let active: Vec<usize> = (0..q).filter(|&j| !frozen[j]).collect();
    let qa = active.len();
    let ridge_vec: Vec<f64> = active
        .iter()
        .map(|&j| {
            let on = opts.penalize.as_ref().map_or(true, |m| m[j]);
            if on {
                opts.ridge
            } else {
                0.0
            }
        })
        .collect();

    let mut order_asc: Vec<usize> = (0..n).collect();
    order_asc.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());

    let pen_loglik = |sc_loglik: f64, beta: &Array1<f64>| -> f64 {
        let mut v = sc_loglik;
        for a in 0..qa {
            v -= 0.5 * ridge_vec[a] * beta[a] * beta[a];
        }
        v
    };

    let mut beta = Array1::<f64>::zeros(qa);
    let mut converged = qa == 0;
    let mut iterations = 0usize;
    let mut current = scan(x, times, events, &order_asc, &active, &beta, true);
    let mut current_pen = pen_loglik(current.loglik, &beta);

    while qa > 0 && iterations < opts.max_iter {
        // Penalized gradient and information at the current point.
        let mut grad_pen = current.grad.clone();
        let mut info_pen = current.info.clone();
        for a in 0..qa {
            grad_pen[a] -= ridge_vec[a] * beta[a];
            info_pen[[a, a]] += ridge_vec[a];
        }
        let gmax = grad_pen.iter().fold(0.0_f64, |acc, g| acc.max(g.abs()));
        if gmax < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let Some((delta, _)) = solve_spd_with_jitter(&info_pen, &grad_pen) else {
            break;
        };

        // Step-halving on the penalized log-likelihood.
        let mut accepted = false;
        let mut step = 1.0;
        for _ in 0..=30 {
            let cand: Array1<f64> = &beta + &(&delta * step);
            let sc = scan(x, times, events, &order_asc, &active, &cand, true);
            let cand_pen = pen_loglik(sc.loglik, &cand);
            if cand_pen.is_finite() && cand_pen >= current_pen - 1e-12 * (1.0 + current_pen.abs())
            {
                beta = cand;
                current = sc;
                current_pen = cand_pen;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    // Covariance from the penalized information at the estimate.
    let mut se_active = vec![f64::INFINITY; qa];
    if qa > 0 {
        let mut info_pen = current.info.clone();
        for a in 0..qa {
            info_pen[[a, a]] += ridge_vec[a];
        }
        let cov = match Cholesky::new(info_pen.view()) {
            Some(ch) => Some(ch.inverse()),
            None => solve_spd_with_jitter(&info_pen, &Array1::zeros(qa)).map(|(_, ch)| ch.inverse()),
        };
        if let Some(cov) = cov {
            for a in 0..qa {
                let v = cov[[a, a]];
                se_active[a] = if v > 0.0 { v.sqrt() } else { f64::INFINITY };
            }
        }
    }

    // Expand to the full column set.
    let mut coefficients = vec![0.0; q];
    let mut standard_errors = vec![f64::INFINITY; q];
    let mut p_values = vec![1.0; q];
    for (a, &j) in active.iter().enumerate() {
        coefficients[j] = beta[a];
        standard_errors[j] = se_active[a];
        p_values[j] = if se_active[a].is_finite() {
            normal_two_sided_p(beta[a] / se_active[a])
        } else {
            1.0
        };
    }

    // Breslow baseline hazard at the estimate, ascending sweep.
    let mut lp = vec![0.0; n];
    for i in 0..n {
        let mut v = 0.0;
        for j in 0..q {
            v += x[[i, j]] * coefficients[j];
        }
        lp[i] = v;
    }
    let m = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut baseline_times = Vec::new();
    let mut baseline_cumhaz = Vec::new();
    {
        let mut s0 = 0.0;
        let mut cum = 0.0;
        let mut stack: Vec<(f64, f64)> = Vec::new(); // (time, d / s0) descending
        let mut i = n;
        while i > 0 {
            let t = times[order_asc[i - 1]];
            let mut lo = i;
            while lo > 0 && times[order_asc[lo - 1]] == t {
                lo -= 1;
            }
            let mut deaths = 0usize;
            for &idx in &order_asc[lo..i] {
                s0 += (lp[idx] - m).exp();
                if events[idx] {
                    deaths += 1;
                }
            }
            if deaths > 0 {
                stack.push((t, deaths as f64 * (-m).exp() / s0));
            }
            i = lo;
        }
        for (t, jump) in stack.into_iter().rev() {
            cum += jump;
            baseline_times.push(t);
            baseline_cumhaz.push(cum);
        }
    }

    Ok(CoxFit {
        coefficients,
        standard_errors,
        p_values,
        converged,
        iterations,
        log_likelihood: current.loglik,
        frozen,
        baseline_times,
        baseline_cumhaz,
    })
}

/// Per-subject score residuals for one design column at the fitted
/// coefficients: the terms of the partial-likelihood score equation, which
/// sum to the gradient (approximately zero for a converged unpenalized fit).
pub fn cox_score_residuals(
    x: ArrayView2<f64>,
    times: &[f64],
    events: &[bool],
    fit: &CoxFit,
    col: usize,
) -> Vec<f64> {
    let n = times.len();
    assert_eq!(x.nrows(), n);
    assert_eq!(events.len(), n);
    assert!(col < x.ncols());

    let mut lp = vec![0.0; n];
    for i in 0..n {
        let mut v = 0.0;
        for j in 0..x.ncols() {
            v += x[[i, j]] * fit.coefficients[j];
        }
        lp[i] = v;
    }
    let m = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = if m.is_finite() { m } else { 0.0 };

    let mut order_asc: Vec<usize> = (0..n).collect();
    order_asc.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());

    // Risk-set sums at each distinct event time (descending sweep), then
    // reversed into ascending order with prefix sums.
    struct EventBlock {
        time: f64,
        xbar: f64,
        a_jump: f64, // d / s0
        b_jump: f64, // d * s1 / s0^2
    }
    let mut blocks: Vec<EventBlock> = Vec::new();
    {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut i = n;
        while i > 0 {
            let t = times[order_asc[i - 1]];
            let mut lo = i;
            while lo > 0 && times[order_asc[lo - 1]] == t {
                lo -= 1;
            }
            let mut deaths = 0usize;
            for &idx in &order_asc[lo..i] {
                let e = (lp[idx] - m).exp();
                s0 += e;
                s1 += e * x[[idx, col]];
                if events[idx] {
                    deaths += 1;
                }
            }
            if deaths > 0 {
                let d = deaths as f64;
                blocks.push(EventBlock {
                    time: t,
                    xbar: s1 / s0,
                    a_jump: d / s0,
                    b_jump: d * s1 / (s0 * s0),
                });
            }
            i = lo;
        }
        blocks.reverse();
    }
    let event_times: Vec<f64> = blocks.iter().map(|b| b.time).collect();
    let mut a_cum = Vec::with_capacity(blocks.len());
    let mut b_cum = Vec::with_capacity(blocks.len());
    let (mut a, mut b) = (0.0, 0.0);
    for blk in &blocks {
        a += blk.a_jump;
        b += blk.b_jump;
        a_cum.push(a);
        b_cum.push(b);
    }

    let mut residuals = vec![0.0; n];
    for i in 0..n {
        let k = event_times.partition_point(|&s| s <= times[i]);
        let (a_i, b_i) = if k == 0 { (0.0, 0.0) } else { (a_cum[k - 1], b_cum[k - 1]) };
        let xi = x[[i, col]];
        let mut r = -(lp[i] - m).exp() * (xi * a_i - b_i);
        if events[i] {
            // The subject's own time is an event time by construction.
            let blk = &blocks[k - 1];
            r += xi - blk.xbar;
        }
        residuals[i] = r;
    }
    residuals
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Two-group exponential data with true log hazard ratio `beta`.
    fn two_group(n: usize, beta: f64, seed: u64) -> (Array2<f64>, Vec<f64>, Vec<bool>) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut x = Array2::zeros((n, 1));
        let mut times = Vec::with_capacity(n);
        for i in 0..n {
            let g = (i % 2) as f64;
            x[[i, 0]] = g;
            let rate = (beta * g).exp();
            let u: f64 = rng.random();
            times.push(-u.ln() / rate);
        }
        (x, times, vec![true; n])
    }

    #[test]
    fn recovers_log_two_hazard_ratio() {
        let (x, times, events) = two_group(4000, std::f64::consts::LN_2, 42);
        let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.coefficients[0] - std::f64::consts::LN_2).abs() < 0.05,
            "beta = {}",
            fit.coefficients[0]
        );
        assert!(fit.p_values[0] < 1e-6);
    }

    #[test]
    fn constant_column_is_frozen() {
        let (mut x, times, events) = two_group(200, 0.7, 1);
        let x2 = {
            let mut wide = Array2::zeros((200, 2));
            wide.column_mut(1).assign(&x.column(0));
            for i in 0..200 {
                wide[[i, 0]] = 3.5;
            }
            wide
        };
        x = x2;
        let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        assert!(fit.frozen[0]);
        assert_eq!(fit.coefficients[0], 0.0);
        assert_eq!(fit.p_values[0], 1.0);
        assert!(!fit.frozen[1]);
        assert!(fit.coefficients[1].abs() > 0.1);
    }

    #[test]
    fn all_censored_is_an_error() {
        let (x, times, _) = two_group(50, 0.0, 2);
        let events = vec![false; 50];
        match fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()) {
            Err(Error::NoEvents) => {}
            other => panic!("expected NoEvents, got {other:?}"),
        }
    }

    #[test]
    fn ridge_shrinks_toward_zero() {
        let (x, times, events) = two_group(400, 1.0, 3);
        let free = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        let pen = fit_cox(
            x.view(),
            &times,
            &events,
            &CoxOptions::ridged(50.0, vec![true]),
        )
        .unwrap();
        assert!(pen.coefficients[0].abs() < free.coefficients[0].abs());
        assert!(pen.coefficients[0].abs() > 0.0);
    }

    #[test]
    fn baseline_matches_nelson_aalen_for_null_model() {
        // Single frozen column => null model; Breslow baseline reduces to
        // Nelson-Aalen: jumps of d_k / n_at_risk.
        let n = 5;
        let x = Array2::from_elem((n, 1), 1.0);
        let times = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let events = vec![true, true, false, true, false];
        let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        assert!((fit.baseline_cumhaz(1.0) - 1.0 / 5.0).abs() < 1e-12);
        assert!((fit.baseline_cumhaz(2.5) - (1.0 / 5.0 + 1.0 / 4.0)).abs() < 1e-12);
        assert!(
            (fit.baseline_cumhaz(10.0) - (1.0 / 5.0 + 1.0 / 4.0 + 1.0 / 2.0)).abs() < 1e-12
        );
        assert_eq!(fit.baseline_cumhaz(0.5), 0.0);
    }

    #[test]
    fn predicted_survival_is_monotone_in_time() {
        let (x, times, events) = two_group(300, 0.5, 4);
        let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        let row = [1.0];
        let mut last = 1.0 + 1e-12;
        for t in [0.0, 0.1, 0.5, 1.0, 2.0, 4.0] {
            let s = fit.predict_survival(t, &row);
            assert!(s <= last && (0.0..=1.0).contains(&s));
            last = s;
        }
    }

    #[test]
    fn score_residuals_sum_to_zero_at_estimate() {
        let (x, times, events) = two_group(500, 0.8, 5);
        let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        let res = cox_score_residuals(x.view(), &times, &events, &fit, 0);
        let total: f64 = res.iter().sum();
        assert!(total.abs() < 1e-4, "score sum = {total}");
    }

    #[test]
    fn tied_event_times_are_handled() {
        let mut x = Array2::zeros((6, 1));
        for i in 0..6 {
            x[[i, 0]] = (i % 2) as f64;
        }
        let times = vec![1.0, 1.0, 1.0, 2.0, 2.0, 3.0];
        let events = vec![true, true, false, true, true, false];
        let fit = fit_cox(x.view(), &times, &events, &CoxOptions::unpenalized()).unwrap();
        assert!(fit.coefficients[0].is_finite());
        assert!(fit.log_likelihood.is_finite());
    }
}
