//! Research-question metrics: rejection rates (type I error and power),
//! top-ranked-variable hit probability, average precision of importance
//! scores, and good-responder classification accuracy, together with the
//! per-repetition record and aggregate-row types they are computed from.
//!
//! All estimates carry a 95% half-width. Proportion metrics (rejection rate,
//! top-rank probability) use the binomial normal approximation
//! `1.96 * sqrt(m * (1 - m) / R)`; continuous metrics (average precision,
//! accuracy, fit seconds) use `1.96 * sd / sqrt(R)`.

use crate::data::TrialData;
use crate::methods::{MethodId, SubgroupPredictor};
use crate::{Error, Result};

/// Critical value of the standard normal at two-sided 95%.
const Z95: f64 = 1.96;

/// One method's outcomes on one repetition of one scenario point.
///
/// `rule` is the human-readable predictor description (empty when the method
/// emitted no predictor); a failed fit stores `error: ...` there and sets
/// `errored`, leaving every optional field absent.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionRecord {
    pub scenario: String,
    /// Target subgroup ARR at the horizon for this grid point.
    pub arr1: f64,
    pub rep: usize,
    pub method: MethodId,
    /// Heterogeneity p-value; absent when the method errored.
    pub het_p: Option<f64>,
    /// True when `het_p` was drawn uniformly under the degenerate convention.
    pub het_degenerate: bool,
    /// Derived from the importance vector; absent when the method reported
    /// no importance at all.
    pub top_var: Option<TopRank>,
    /// Per-variable importance scores (sibling CSV on disk).
    pub importance: Option<Vec<f64>>,
    /// Validation-set classification accuracy; absent without a predictor.
    pub accuracy: Option<f64>,
    /// Wall-clock duration of the fit call alone.
    pub fit_seconds: f64,
    pub rule: String,
    pub errored: bool,
}

/// The top-ranked variable of an importance vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopRank {
    /// All scores were zero: no meaningful ranking, counted as a miss.
    NoSignal,
    /// 0-based index of the argmax (smallest index wins ties).
    Var(usize),
}

/// Argmax with smallest-index tie-break; all-zero vectors have no top.
pub fn top_rank_of(importance: &[f64]) -> TopRank {
    if importance.iter().all(|&v| v == 0.0) {
        return TopRank::NoSignal;
    }
    let mut best = 0usize;
    for (j, &v) in importance.iter().enumerate().skip(1) {
        if v > importance[best] {
            best = j;
        }
    }
    TopRank::Var(best)
}

/// Whether the top-ranked variable lies in the predictive set. All-zero
/// importance is a miss by convention.
pub fn top_rank_hit(importance: &[f64], predictive_set: &[usize]) -> bool {
    match top_rank_of(importance) {
        TopRank::NoSignal => false,
        TopRank::Var(j) => predictive_set.contains(&j),
    }
}

/// A proportion or mean with its 95% half-width and the count it was
/// computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub count: usize,
}

/// Binomial 95% estimate of `hits / total`.
pub fn proportion_estimate(hits: usize, total: usize) -> Estimate {
    let m = hits as f64 / total as f64;
    Estimate {
        mean: m,
        half_width: Z95 * (m * (1.0 - m) / total as f64).sqrt(),
        count: total,
    }
}

/// Mean of continuous values with a normal 95% half-width from the sample
/// standard deviation. A single observation has an undefined half-width
/// (reported as NaN).
pub fn mean_estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    let mean = crate::stats::mean(values);
    let half_width = if n >= 2 {
        Z95 * (crate::stats::sample_variance(values) / n as f64).sqrt()
    } else {
        f64::NAN
    };
    Estimate {
        mean,
        half_width,
        count: n,
    }
}

/// Fraction of p-values strictly below `alpha`, with binomial half-width.
/// Under the null this is the type I error; under an alternative, the power.
pub fn rejection_rate(pvalues: &[f64], alpha: f64) -> Result<Estimate> {
    if pvalues.is_empty() {
        return Err(Error::validation("rejection_rate needs at least one p-value"));
    }
    if pvalues.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::validation("p-values must lie in [0, 1]"));
    }
    let hits = pvalues.iter().filter(|&&p| p < alpha).count();
    Ok(proportion_estimate(hits, pvalues.len()))
}

/// Average precision of an importance ranking against binary labels:
/// the mean over positives of the precision at that positive's rank, with
/// ranks by descending score and smallest-index tie-break.
pub fn average_precision(importance: &[f64], labels: &[bool]) -> Result<f64> {
    if importance.len() != labels.len() {
        return Err(Error::validation(
            "importance and labels must have equal length",
        ));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::validation(
            "average precision requires at least one positive label",
        ));
    }
    let mut order: Vec<usize> = (0..importance.len()).collect();
    // Stable sort: equal scores keep ascending index order.
    order.sort_by(|&a, &b| importance[b].partial_cmp(&importance[a]).unwrap());
    let mut seen_pos = 0usize;
    let mut sum = 0.0;
    for (rank0, &j) in order.iter().enumerate() {
        if labels[j] {
            seen_pos += 1;
            sum += seen_pos as f64 / (rank0 + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}

/// Fraction of validation rows the predictor labels identically to the
/// ground-truth subgroup flag.
pub fn classification_accuracy(
    predictor: &SubgroupPredictor,
    validation: &TrialData,
) -> Result<f64> {
    let truth = validation
        .true_subgroup
        .as_ref()
        .ok_or_else(|| Error::validation("validation data carries no ground-truth subgroup"))?;
    let predicted = predictor.predict(validation);
    let agree = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(a, b)| a == b)
        .count();
    Ok(agree as f64 / validation.n() as f64)
}

/// One aggregated table cell: a metric's estimate for one method at one
/// scenario grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scenario: String,
    pub arr1: f64,
    pub method: MethodId,
    pub metric: String,
    pub mean: f64,
    pub half_width: f64,
    pub count: usize,
}

/// Metric names emitted per (scenario, arr1, method) group, in output order.
const METRIC_ORDER: [&str; 5] = [
    "reject_rate",
    "top_rank",
    "avg_precision",
    "accuracy",
    "fit_seconds",
];

/// Aggregate repetition records into table rows.
///
/// Groups by (scenario, arr1, method) and emits, when estimable:
/// - `reject_rate`: fraction of available `het_p` strictly below `alpha`
///   (degenerate draws included; errored records have no p and drop out);
/// - `top_rank`: probability the top-ranked variable is in `predictive_set`
///   (all-zero rankings count as misses; methods without importance drop out);
/// - `avg_precision`: mean AP of the importance vector against the
///   predictive-set labels;
/// - `accuracy`: mean validation accuracy over records with a predictor;
/// - `fit_seconds`: mean fit duration over non-errored records.
///
/// `top_rank` and `avg_precision` rows require a nonempty `predictive_set`;
/// `avg_precision` additionally requires in-memory importance vectors.
pub fn aggregate_records(
    records: &[RepetitionRecord],
    predictive_set: &[usize],
    alpha: f64,
) -> Vec<AggregateRow> {
    let mut keys: Vec<(&str, f64, MethodId)> = records
        .iter()
        .map(|r| (r.scenario.as_str(), r.arr1, r.method))
        .collect();
    keys.sort_by(|a, b| {
        a.0.cmp(b.0)
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.ordinal().cmp(&b.2.ordinal()))
    });
    keys.dedup();

    let mut rows = Vec::new();
    for (scenario, arr1, method) in keys {
        let group: Vec<&RepetitionRecord> = records
            .iter()
            .filter(|r| r.scenario == scenario && r.arr1 == arr1 && r.method == method)
            .collect();
        for &metric in &METRIC_ORDER {
            let estimate = match metric {
                "reject_rate" => {
                    let ps: Vec<f64> = group.iter().filter_map(|r| r.het_p).collect();
                    rejection_rate(&ps, alpha).ok()
                }
                "top_rank" => {
                    if predictive_set.is_empty() {
                        None
                    } else {
                        let tops: Vec<TopRank> =
                            group.iter().filter_map(|r| r.top_var).collect();
                        let hits = tops
                            .iter()
                            .filter(|t| matches!(t, TopRank::Var(j) if predictive_set.contains(j)))
                            .count();
                        (!tops.is_empty()).then(|| proportion_estimate(hits, tops.len()))
                    }
                }
                "avg_precision" => {
                    if predictive_set.is_empty() {
                        None
                    } else {
                        let aps: Vec<f64> = group
                            .iter()
                            .filter_map(|r| r.importance.as_ref())
                            .filter_map(|imp| {
                                let labels: Vec<bool> = (0..imp.len())
                                    .map(|j| predictive_set.contains(&j))
                                    .collect();
                                average_precision(imp, &labels).ok()
                            })
                            .collect();
                        (!aps.is_empty()).then(|| mean_estimate(&aps))
                    }
                }
                "accuracy" => {
                    let accs: Vec<f64> = group.iter().filter_map(|r| r.accuracy).collect();
                    (!accs.is_empty()).then(|| mean_estimate(&accs))
                }
                "fit_seconds" => {
                    let secs: Vec<f64> = group
                        .iter()
                        .filter(|r| !r.errored)
                        .map(|r| r.fit_seconds)
                        .collect();
                    (!secs.is_empty()).then(|| mean_estimate(&secs))
                }
                _ => unreachable!(),
            };
            if let Some(e) = estimate {
                rows.push(AggregateRow {
                    scenario: scenario.to_string(),
                    arr1,
                    method,
                    metric: metric.to_string(),
                    mean: e.mean,
                    half_width: e.half_width,
                    count: e.count,
                });
            }
        }
    }
    rows
}
