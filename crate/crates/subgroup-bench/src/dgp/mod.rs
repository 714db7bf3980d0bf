//! Data-generating process: a two-arm survival trial whose treatment effect
//! is constant within a known subgroup and (differently) constant outside it.
//!
//! The hazard for a subject with covariates X, treatment W, and subgroup
//! indicator G(X) is
//!
//! ```text
//! h(t | X, W) = t * exp(beta0*W + (beta1 - beta0)*G(X)*W + gamma' X)
//! ```
//!
//! so the control-arm effect of the covariates is purely prognostic
//! (`gamma' X`), treated subjects outside the subgroup get hazard coefficient
//! `beta0`, and treated subjects inside it get `beta1`. Censoring, when
//! enabled, is an independent scaled Beta draw.

mod calibrate;
mod gamma;
mod hazard;

pub use calibrate::{
    solve_null_constraint, BetaGrid, CalibrationCurve, MonteCarloCalibration,
};
pub use gamma::prognostic_vector;
pub use hazard::{individual_arr, linear_predictor, sample_event_time, survival_at};

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::data::TrialData;
use crate::error::Error;
use crate::Result;

// ---------------------------------------------------------------------------
// Subgroup definitions

/// Direction of a threshold clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Covariate at or above the threshold.
    Ge,
    /// Covariate at or below the threshold.
    Le,
    /// Strictly above (the right branch of a tree split).
    Gt,
    /// Strictly below.
    Lt,
}

/// One clause of a conjunctive subgroup rule: `x[var] >= threshold` or
/// `x[var] <= threshold`. `var` is a 0-based column index.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupClause {
    pub var: usize,
    pub direction: Direction,
    pub threshold: f64,
}

impl SubgroupClause {
    pub fn matches(&self, row: &[f64]) -> bool {
        match self.direction {
            Direction::Ge => row[self.var] >= self.threshold,
            Direction::Le => row[self.var] <= self.threshold,
            Direction::Gt => row[self.var] > self.threshold,
            Direction::Lt => row[self.var] < self.threshold,
        }
    }
}

impl std::fmt::Display for SubgroupClause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.direction {
            Direction::Ge => ">=",
            Direction::Le => "<=",
            Direction::Gt => ">",
            Direction::Lt => "<",
        };
        write!(f, "x{}{}{}", self.var + 1, op, self.threshold)
    }
}

/// A conjunction of threshold clauses. The empty conjunction matches everyone.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubgroupDefinition {
    pub clauses: Vec<SubgroupClause>,
}

impl SubgroupDefinition {
    /// The benchmark's canonical shape: four covariates at or above -1.
    /// `vars` are 0-based column indices.
    pub fn four_above(vars: [usize; 4], threshold: f64) -> SubgroupDefinition {
        SubgroupDefinition {
            clauses: vars
                .iter()
                .map(|&var| SubgroupClause {
                    var,
                    direction: Direction::Ge,
                    threshold,
                })
                .collect(),
        }
    }

    /// Whether a covariate row satisfies every clause.
    pub fn contains(&self, row: &[f64]) -> bool {
        self.clauses.iter().all(|c| c.matches(row))
    }

    /// 0-based indices of the variables used, in first-appearance order,
    /// deduplicated.
    pub fn variables(&self) -> Vec<usize> {
        let mut seen = Vec::new();
        for c in &self.clauses {
            if !seen.contains(&c.var) {
                seen.push(c.var);
            }
        }
        seen
    }
}

impl std::fmt::Display for SubgroupDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "(everyone)");
        }
        let parts: Vec<String> = self.clauses.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" & "))
    }
}

// ---------------------------------------------------------------------------
// Covariate sources

/// Where covariate rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateSource {
    /// Independent standard normal covariates.
    Gaussian { p: usize },
    /// Rows resampled (with replacement) from a fixed matrix, e.g. a real
    /// covariate table.
    Empirical { rows: Array2<f64> },
}

impl CovariateSource {
    pub fn p(&self) -> usize {
        match self {
            CovariateSource::Gaussian { p } => *p,
            CovariateSource::Empirical { rows } => rows.ncols(),
        }
    }

    /// Draws one covariate row into `out`.
    pub fn sample_row(&self, rng: &mut impl Rng, out: &mut [f64]) {
        match self {
            CovariateSource::Gaussian { p } => {
                debug_assert_eq!(out.len(), *p);
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            CovariateSource::Empirical { rows } => {
                let i = rng.random_range(0..rows.nrows());
                for (j, v) in out.iter_mut().enumerate() {
                    *v = rows[[i, j]];
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CovariateSource::Gaussian { p } => {
                if *p == 0 {
                    return Err(Error::validation("need at least one covariate"));
                }
            }
            CovariateSource::Empirical { rows } => {
                if rows.nrows() == 0 || rows.ncols() == 0 {
                    return Err(Error::validation("empirical covariate matrix is empty"));
                }
                if rows.iter().any(|v| !v.is_finite()) {
                    return Err(Error::validation("empirical covariates must be finite"));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Generator configuration

/// Independent censoring: `C = scale * Beta(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoringConfig {
    pub a: f64,
    pub b: f64,
    pub scale: f64,
}

impl CensoringConfig {
    /// Beta censoring on the benchmark's standard `[0, 20]` support.
    pub fn scaled_beta(a: f64, b: f64) -> CensoringConfig {
        CensoringConfig { a, b, scale: 20.0 }
    }
}

/// Everything needed to generate one trial.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub covariates: CovariateSource,
    /// Prognostic coefficients, one per covariate.
    pub gamma: Vec<f64>,
    /// The true subgroup of differential responders.
    pub subgroup: SubgroupDefinition,
    /// Treatment coefficient outside the subgroup.
    pub beta0: f64,
    /// Treatment coefficient inside the subgroup.
    pub beta1: f64,
    /// Independent censoring; `None` observes every event.
    pub censoring: Option<CensoringConfig>,
}

impl GeneratorConfig {
    /// A null-effect Gaussian configuration with the published prognostic
    /// vector for `p` and the subgroup on the last four covariates.
    /// Convenient for examples and tests.
    pub fn gaussian_null(p: usize) -> Result<GeneratorConfig> {
        let gamma = prognostic_vector(p)?;
        let subgroup = SubgroupDefinition::four_above([p - 4, p - 3, p - 2, p - 1], -1.0);
        Ok(GeneratorConfig {
            covariates: CovariateSource::Gaussian { p },
            gamma,
            subgroup,
            beta0: 0.0,
            beta1: 0.0,
            censoring: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.covariates.validate()?;
        let p = self.covariates.p();
        if self.gamma.len() != p {
            return Err(Error::validation(format!(
                "gamma has {} entries for {} covariates",
                self.gamma.len(),
                p
            )));
        }
        if self.gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("gamma must be finite"));
        }
        for c in &self.subgroup.clauses {
            if c.var >= p {
                return Err(Error::validation(format!(
                    "subgroup clause uses x{} but p = {p}",
                    c.var + 1
                )));
            }
            if !c.threshold.is_finite() {
                return Err(Error::validation("subgroup thresholds must be finite"));
            }
        }
        if !self.beta0.is_finite() || !self.beta1.is_finite() {
            return Err(Error::validation("beta0/beta1 must be finite"));
        }
        if let Some(c) = self.censoring {
            if c.a <= 0.0 || c.b <= 0.0 || c.scale <= 0.0 {
                return Err(Error::validation("censoring parameters must be positive"));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Trial generation

/// Generates `n` subjects. Per subject, the draws happen in a fixed order
/// (covariates, arm, event time, censoring time) so identical seeds give
/// identical trials. Panics only on configs that fail [`GeneratorConfig::validate`].
pub fn generate_trial(config: &GeneratorConfig, n: usize, rng: &mut impl Rng) -> TrialData {
    config.validate().expect("invalid generator config");
    let p = config.covariates.p();
    let censor_dist = config
        .censoring
        .map(|c| Beta::new(c.a, c.b).expect("validated censoring parameters"));

    let mut x = Array2::zeros((n, p));
    let mut w = Vec::with_capacity(n);
    let mut time = Vec::with_capacity(n);
    let mut event = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut row = vec![0.0; p];

    for i in 0..n {
        config.covariates.sample_row(rng, &mut row);
        let wi = rng.random_bool(0.5);
        let gi = config.subgroup.contains(&row);
        let gamma_x: f64 = row.iter().zip(&config.gamma).map(|(a, b)| a * b).sum();
        let lp = linear_predictor(gamma_x, wi, gi, config.beta0, config.beta1);
        let t = sample_event_time(lp, rng);
        let (u, e) = match (&censor_dist, config.censoring) {
            (Some(dist), Some(cfg)) => {
                let c = cfg.scale * dist.sample(rng);
                if t <= c {
                    (t, true)
                } else {
                    (c, false)
                }
            }
            _ => (t, true),
        };
        for j in 0..p {
            x[[i, j]] = row[j];
        }
        w.push(wi);
        time.push(u);
        event.push(e);
        g.push(gi);
    }

    TrialData {
        x,
        w,
        time,
        event,
        true_subgroup: Some(g),
    }
}
