//! Subgroup discovery methods and the oracle baseline.
//!
//! Every method consumes a trial and produces a [`MethodResult`]: an optional
//! heterogeneity p-value (methods whose test is internal), an optional
//! per-covariate importance vector, and an optional subgroup predictor for
//! out-of-sample classification. Methods that propose subgroups rather than
//! testing in place (`multivariate_*`, `sides`, `seqbt`, `ardp`) leave
//! `het_p` empty; the benchmark harness tests their proposals on held-out
//! data with the difference-in-differences test.

mod ardp;
mod itree;
mod mcox;
mod mob;
mod oracle;
mod partition;
mod seqbt;
mod sides;
mod survival_tree;
mod univariate;

pub use mcox::CoxArrModel;
pub use partition::PartitionTree;
pub use survival_tree::SurvivalTree;

use rand::Rng;

use crate::data::TrialData;
use crate::dgp::{SubgroupClause, SubgroupDefinition};
use crate::survival::kaplan_meier;
use crate::Result;

/// Floor applied to p-values before taking reciprocals for importance
/// scores, so a numerically-zero p-value stays finite and comparable.
pub(crate) const P_FLOOR: f64 = 1e-300;

// ---------------------------------------------------------------------------
// Method identifiers

/// The benchmarked methods, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    UnivariateInteraction,
    UnivariateTTest,
    MultivariateCox,
    MultivariateTree,
    Mob,
    ITree,
    Sides,
    SeqBt,
    Ardp,
    Oracle,
}

impl MethodId {
    pub const ALL: [MethodId; 10] = [
        MethodId::UnivariateInteraction,
        MethodId::UnivariateTTest,
        MethodId::MultivariateCox,
        MethodId::MultivariateTree,
        MethodId::Mob,
        MethodId::ITree,
        MethodId::Sides,
        MethodId::SeqBt,
        MethodId::Ardp,
        MethodId::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodId::UnivariateInteraction => "univariate_interaction",
            MethodId::UnivariateTTest => "univariate_ttest",
            MethodId::MultivariateCox => "multivariate_cox",
            MethodId::MultivariateTree => "multivariate_tree",
            MethodId::Mob => "mob",
            MethodId::ITree => "itree",
            MethodId::Sides => "sides",
            MethodId::SeqBt => "seqbt",
            MethodId::Ardp => "ardp",
            MethodId::Oracle => "oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<MethodId> {
        MethodId::ALL.iter().copied().find(|m| m.name() == name)
    }

    /// Index into [`MethodId::ALL`]; stable across scenario method subsets,
    /// which keeps per-method RNG streams independent of the selection.
    pub fn ordinal(&self) -> usize {
        MethodId::ALL.iter().position(|m| m == self).unwrap()
    }

    /// Methods that only propose subgroups; their heterogeneity evidence is
    /// a held-out difference-in-differences test run by the harness.
    pub fn needs_holdout(&self) -> bool {
        matches!(
            self,
            MethodId::MultivariateCox
                | MethodId::MultivariateTree
                | MethodId::Sides
                | MethodId::SeqBt
                | MethodId::Ardp
        )
    }

    /// Whether the method produces a covariate importance ranking.
    pub fn has_importance(&self) -> bool {
        !matches!(self, MethodId::MultivariateTree)
    }
}

impl std::fmt::Display for MethodId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Predictors

/// A conjunctive threshold rule used as a classifier. When `positive` is
/// false the rule's complement is the predicted responder set.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRule {
    pub clauses: Vec<SubgroupClause>,
    pub positive: bool,
}

impl ThresholdRule {
    pub fn matches(&self, row: &[f64]) -> bool {
        self.clauses.iter().all(|c| c.matches(row))
    }

    pub fn predict_row(&self, row: &[f64]) -> bool {
        self.matches(row) == self.positive
    }
}

impl std::fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let body = if self.clauses.is_empty() {
            "(everyone)".to_string()
        } else {
            self.clauses
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" & ")
        };
        if self.positive {
            write!(f, "{body}")
        } else {
            write!(f, "not({body})")
        }
    }
}

/// How a fitted method classifies new subjects as predicted responders.
#[derive(Debug, Clone)]
pub enum SubgroupPredictor {
    /// Membership (or non-membership) in a threshold rule.
    Rule(ThresholdRule),
    /// Sign of the model-based ARR from a multivariate Cox fit.
    CoxArrSign(Box<CoxArrModel>),
    /// Sign of the ARR implied by a survival tree's leaves.
    TreeArrSign(Box<SurvivalTree>),
}

impl SubgroupPredictor {
    pub fn predict_row(&self, row: &[f64]) -> bool {
        match self {
            SubgroupPredictor::Rule(r) => r.predict_row(row),
            SubgroupPredictor::CoxArrSign(m) => m.predicted_arr(row) >= 0.0,
            SubgroupPredictor::TreeArrSign(t) => t.predicted_arr(row) >= 0.0,
        }
    }

    /// Labels every row of a trial.
    pub fn predict(&self, data: &TrialData) -> Vec<bool> {
        let mut out = Vec::with_capacity(data.n());
        let mut row = vec![0.0; data.p()];
        for i in 0..data.n() {
            for j in 0..data.p() {
                row[j] = data.x[[i, j]];
            }
            out.push(self.predict_row(&row));
        }
        out
    }

    /// Human-readable form for result tables.
    pub fn description(&self) -> String {
        match self {
            SubgroupPredictor::Rule(r) => r.to_string(),
            SubgroupPredictor::CoxArrSign(_) => "sign(cox-model ARR)".into(),
            SubgroupPredictor::TreeArrSign(_) => "sign(tree-model ARR)".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Results and dispatch

/// Output of one method on one trial.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: MethodId,
    /// Heterogeneity p-value for methods that test internally; `None` for
    /// methods tested downstream on held-out data.
    pub het_p: Option<f64>,
    /// Set when `het_p` came from the degenerate-test convention.
    pub het_degenerate: bool,
    /// Per-covariate importance scores (higher = more suspected predictive).
    pub importance: Option<Vec<f64>>,
    /// Classifier for new subjects, when the method produced one.
    pub predictor: Option<SubgroupPredictor>,
    /// Additional candidate subgroups whose heterogeneity evidence the
    /// harness should test (used by SIDES, whose final p-value is the best
    /// of its candidates without multiplicity adjustment).
    pub candidates: Vec<SubgroupPredictor>,
}

/// Trial-independent settings shared by every method.
#[derive(Debug, Clone)]
pub struct FitContext<'a> {
    /// Time at which ARR-style quantities are evaluated.
    pub horizon: f64,
    /// Significance level used by recursive partitioners to decide splits.
    pub alpha: f64,
    /// Ground truth handed only to the oracle method.
    pub oracle: Option<&'a SubgroupDefinition>,
    /// Lets the exhaustive-search methods (SIDES, SeqBT) run beyond 30
    /// covariates despite the cost.
    pub force_high_dim: bool,
}

impl Default for FitContext<'_> {
    fn default() -> Self {
        FitContext {
            horizon: 1.0,
            alpha: 0.05,
            oracle: None,
            force_high_dim: false,
        }
    }
}

/// Runs one method. `rng` feeds only the degenerate branches of internal
/// tests (currently the univariate t-test); it is still threaded everywhere
/// so the call shape is uniform.
pub fn fit_method(
    id: MethodId,
    data: &TrialData,
    ctx: &FitContext,
    rng: &mut impl Rng,
) -> Result<MethodResult> {
    data.validate()?;
    match id {
        MethodId::UnivariateInteraction => univariate::fit_interaction(data, ctx),
        MethodId::UnivariateTTest => univariate::fit_ttest(data, ctx, rng),
        MethodId::MultivariateCox => mcox::fit(data, ctx),
        MethodId::MultivariateTree => survival_tree::fit(data, ctx),
        MethodId::Mob => mob::fit(data, ctx),
        MethodId::ITree => itree::fit(data, ctx),
        MethodId::Sides => sides::fit(data, ctx),
        MethodId::SeqBt => seqbt::fit(data, ctx),
        MethodId::Ardp => ardp::fit(data, ctx),
        MethodId::Oracle => oracle::fit(data, ctx),
    }
}

// ---------------------------------------------------------------------------
// Shared helpers

/// Kaplan-Meier ARR at `horizon` between arms, over the rows in `indices`.
/// `None` when either arm is empty there.
pub(crate) fn km_arr(data: &TrialData, indices: &[usize], horizon: f64) -> Option<f64> {
    let mut t1 = Vec::new();
    let mut e1 = Vec::new();
    let mut t0 = Vec::new();
    let mut e0 = Vec::new();
    for &i in indices {
        if data.w[i] {
            t1.push(data.time[i]);
            e1.push(data.event[i]);
        } else {
            t0.push(data.time[i]);
            e0.push(data.event[i]);
        }
    }
    if t1.is_empty() || t0.is_empty() {
        return None;
    }
    let s1 = kaplan_meier(&t1, &e1).ok()?.eval(horizon);
    let s0 = kaplan_meier(&t0, &e0).ok()?.eval(horizon);
    Some(s1 - s0)
}

/// Median split on covariate `j`, oriented toward the side with the larger
/// observed ARR. Returns a rule whose predicted responders are that side.
pub(crate) fn median_split_rule(data: &TrialData, j: usize, horizon: f64) -> ThresholdRule {
    let col: Vec<f64> = (0..data.n()).map(|i| data.x[[i, j]]).collect();
    let med = crate::stats::median(&col);
    let (mut ge, mut lt) = (Vec::new(), Vec::new());
    for (i, v) in col.iter().enumerate() {
        if *v >= med {
            ge.push(i);
        } else {
            lt.push(i);
        }
    }
    let arr_ge = km_arr(data, &ge, horizon).unwrap_or(f64::NEG_INFINITY);
    let arr_lt = km_arr(data, &lt, horizon).unwrap_or(f64::NEG_INFINITY);
    ThresholdRule {
        clauses: vec![SubgroupClause {
            var: j,
            direction: crate::dgp::Direction::Ge,
            threshold: med,
        }],
        positive: arr_ge >= arr_lt,
    }
}

/// Importance scores `1 / max(p, floor)` from per-covariate p-values.
pub(crate) fn importance_from_pvalues(pvalues: &[f64]) -> Vec<f64> {
    pvalues.iter().map(|&p| 1.0 / p.max(P_FLOOR)).collect()
}

/// Rank-based importance for rule methods: the first variable entering the
/// rule scores highest, later ones progressively lower, everything else 0.
pub(crate) fn rule_order_importance(p: usize, ordered_vars: &[usize]) -> Vec<f64> {
    let mut scores = vec![0.0; p];
    let l = ordered_vars.len();
    for (k, &v) in ordered_vars.iter().enumerate() {
        if scores[v] == 0.0 {
            scores[v] = (l - k) as f64;
        }
    }
    scores
}

/// Distinct quantile-based split thresholds for the given levels over the
/// values of covariate `j` at `indices`. Consecutive duplicates collapse.
pub(crate) fn quantile_thresholds(
    data: &TrialData,
    indices: &[usize],
    j: usize,
    levels: &[f64],
) -> Vec<f64> {
    if indices.is_empty() {
        return Vec::new();
    }
    let mut vals: Vec<f64> = indices.iter().map(|&i| data.x[[i, j]]).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(levels.len());
    for &q in levels {
        let c = crate::stats::quantile_sorted(&vals, q);
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

/// Fits `Cox(W)` on a row subset and returns the Wald z of the treatment
/// coefficient; `None` when the subset cannot support the fit (too small, no
/// events, constant arm, or non-finite standard error).
pub(crate) fn treatment_z(data: &TrialData, indices: &[usize]) -> Option<f64> {
    if indices.len() < 2 {
        return None;
    }
    let mut x = ndarray::Array2::zeros((indices.len(), 1));
    let mut times = Vec::with_capacity(indices.len());
    let mut events = Vec::with_capacity(indices.len());
    for (r, &i) in indices.iter().enumerate() {
        x[[r, 0]] = if data.w[i] { 1.0 } else { 0.0 };
        times.push(data.time[i]);
        events.push(data.event[i]);
    }
    let fit = crate::survival::fit_cox(
        x.view(),
        &times,
        &events,
        &crate::survival::CoxOptions::unpenalized(),
    )
    .ok()?;
    if fit.frozen[0] || !fit.standard_errors[0].is_finite() {
        return None;
    }
    Some(fit.coefficients[0] / fit.standard_errors[0])
}
