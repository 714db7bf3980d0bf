//! The benchmark harness: scenario configuration, the repetition protocol,
//! seeded parallel execution, and the files a run leaves behind.
//!
//! One repetition at one ARR grid point generates a discovery trial and a
//! validation trial, fits every configured method, and produces one
//! [`RepetitionRecord`] per method:
//!
//! - In-fit methods (univariate interaction, univariate t-test, MOB, ITree,
//!   oracle) fit on the full discovery set and report their own
//!   heterogeneity p-value.
//! - Train/test methods (multivariate Cox, multivariate tree, SIDES, SeqBT,
//!   ARDP) fit on the train part of the discovery set; their heterogeneity
//!   p-value is the difference-in-differences test of their predicted
//!   subgroup on the held-out test part. SIDES tests each of its exported
//!   candidates and keeps the smallest p-value, unadjusted. A method that
//!   emits no predictor at all draws a uniform p-value (degenerate).
//! - Every emitted predictor is scored for accuracy on the validation set.
//!
//! Everything is deterministic given the scenario: repetition seeds mix
//! `(base_seed, arr index, rep)`, and each consumer inside a repetition owns
//! a numbered stream, so results do not depend on worker count, method
//! subsets, or resumption.

pub mod io;
pub mod scenario;
pub mod seed;

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use rand::Rng;

use crate::dgp::{generate_trial, CalibrationCurve};
use crate::methods::{fit_method, FitContext, MethodId, SubgroupPredictor};
use crate::metrics::{
    aggregate_records, classification_accuracy, top_rank_of, AggregateRow, RepetitionRecord,
};
use crate::survival::diff_in_diff_test;
use crate::{Error, Result};

pub use io::SeedEntry;
pub use scenario::ScenarioSpec;

/// Knobs for one benchmark run that are not part of the scenario itself.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the process-wide default pool.
    pub workers: Option<usize>,
    /// Allow the exhaustive-search methods (SIDES, SeqBT) on p > 30.
    pub force_wide: bool,
    /// Records from an interrupted run; completed (arr1, rep, method)
    /// triples are kept as-is and only the missing work is executed.
    pub resume: Option<Vec<RepetitionRecord>>,
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// One record per (ARR point, repetition, method), sorted by
    /// (arr1, rep, method).
    pub records: Vec<RepetitionRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub seeds: Vec<SeedEntry>,
    /// The ARR targets of the grid, ascending from 0.
    pub arr_targets: Vec<f64>,
    /// Fraction of records whose method fit failed.
    pub errored_fraction: f64,
    pub wall_seconds: f64,
}

/// Fixed evaluation horizon: ARR and leaf effects are taken at t = 1.
pub const HORIZON: f64 = 1.0;

/// Run one repetition at one calibrated grid point, producing one record per
/// requested method. Deterministic given `(spec, arr_index, rep)`.
pub fn run_repetition(
    spec: &ScenarioSpec,
    arr_index: usize,
    arr1: f64,
    betas: (f64, f64),
    rep: usize,
    methods: &[MethodId],
    force_wide: bool,
) -> Vec<RepetitionRecord> {
    let rep_seed = seed::repetition_seed(spec.base_seed, arr_index, rep);
    let config = spec.generator_config(betas.0, betas.1);
    let discovery = generate_trial(
        &config,
        spec.n,
        &mut seed::stream_rng(rep_seed, seed::STREAM_DISCOVERY),
    );
    let validation = generate_trial(
        &config,
        spec.validation_n,
        &mut seed::stream_rng(rep_seed, seed::STREAM_VALIDATION),
    );
    let train_len = ((spec.n as f64) * spec.train_fraction).floor() as usize;
    let needs_split = methods.iter().any(|m| m.needs_holdout());
    let split = needs_split.then(|| discovery.split_at(train_len));

    let ctx = FitContext {
        horizon: HORIZON,
        alpha: spec.alpha,
        oracle: Some(&config.subgroup),
        force_high_dim: force_wide,
    };

    let mut records = Vec::with_capacity(methods.len());
    for &method in methods {
        let fit_data = if method.needs_holdout() {
            &split.as_ref().unwrap().0
        } else {
            &discovery
        };
        let mut fit_rng =
            seed::stream_rng(rep_seed, seed::STREAM_FIT_BASE + method.ordinal() as u64);
        let started = Instant::now();
        let fitted = fit_method(method, fit_data, &ctx, &mut fit_rng);
        let fit_seconds = started.elapsed().as_secs_f64();

        let record = match fitted {
            Err(e) => RepetitionRecord {
                scenario: spec.name.clone(),
                arr1,
                rep,
                method,
                het_p: None,
                het_degenerate: false,
                top_var: None,
                importance: None,
                accuracy: None,
                fit_seconds,
                rule: format!("error: {e}"),
                errored: true,
            },
            Ok(res) => {
                let (het_p, het_degenerate) = if method.needs_holdout() {
                    let test = &split.as_ref().unwrap().1;
                    let mut het_rng = seed::stream_rng(
                        rep_seed,
                        seed::STREAM_HET_BASE + method.ordinal() as u64,
                    );
                    held_out_het(&res.candidates, res.predictor.as_ref(), test, &mut het_rng)
                } else {
                    (res.het_p, res.het_degenerate)
                };
                let accuracy = res
                    .predictor
                    .as_ref()
                    .and_then(|p| classification_accuracy(p, &validation).ok());
                let rule = res
                    .predictor
                    .as_ref()
                    .map(SubgroupPredictor::description)
                    .unwrap_or_default();
                RepetitionRecord {
                    scenario: spec.name.clone(),
                    arr1,
                    rep,
                    method,
                    het_p,
                    het_degenerate,
                    top_var: res.importance.as_deref().map(top_rank_of),
                    importance: res.importance,
                    accuracy,
                    fit_seconds,
                    rule,
                    errored: false,
                }
            }
        };
        records.push(record);
    }
    records
}

/// Held-out heterogeneity p-value for a train/test method: the smallest
/// difference-in-differences p over the exported candidates (SIDES), the
/// single predictor's p otherwise, and a uniform draw when the method
/// produced nothing to test.
fn held_out_het(
    candidates: &[SubgroupPredictor],
    predictor: Option<&SubgroupPredictor>,
    test: &crate::data::TrialData,
    rng: &mut impl Rng,
) -> (Option<f64>, bool) {
    let to_test: Vec<&SubgroupPredictor> = if candidates.is_empty() {
        predictor.into_iter().collect()
    } else {
        candidates.iter().collect()
    };
    if to_test.is_empty() {
        return (Some(rng.random::<f64>()), true);
    }
    let mut best: Option<f64> = None;
    let mut all_degenerate = true;
    for cand in to_test {
        let membership = cand.predict(test);
        let outcome = diff_in_diff_test(&test.time, &test.w, &membership, rng);
        all_degenerate &= outcome.degenerate;
        if best.is_none_or(|b| outcome.p_value < b) {
            best = Some(outcome.p_value);
        }
    }
    (best, all_degenerate)
}

/// Run the full grid: `spec.arr_points` ARR targets × `spec.repetitions`
/// repetitions × `spec.methods`, in parallel over repetitions.
///
/// The calibration curve must belong to this scenario's generator (the
/// config hash recorded in its sidecar is checked when present).
pub fn run_benchmark(
    spec: &ScenarioSpec,
    curve: &CalibrationCurve,
    options: &RunOptions,
) -> Result<RunOutcome> {
    let started = Instant::now();
    spec.validate()?;
    if let Some(recorded) = &curve.config_hash {
        let expected = spec.config_hash();
        if *recorded != expected {
            return Err(Error::config(format!(
                "calibration was computed for config hash {recorded}, \
                 but this scenario hashes to {expected}"
            )));
        }
    }
    if !options.force_wide {
        let wide = spec.wide_search_methods();
        if !wide.is_empty() {
            return Err(Error::config(format!(
                "{} search exhaustively over thresholds and are quadratic in p; \
                 they are disabled for p = {} > 30 (pass --force to override)",
                wide.iter()
                    .map(|m| m.name())
                    .collect::<Vec<_>>()
                    .join(" and "),
                spec.p
            )));
        }
    }

    let arr_targets = if spec.arr_points == 1 {
        vec![0.0]
    } else {
        curve.arr_grid(spec.arr_points)?
    };
    let mut betas = Vec::with_capacity(arr_targets.len());
    for &target in &arr_targets {
        betas.push(curve.betas_for_arr1(target)?);
    }

    // Records carried over from an interrupted run: keep only rows that
    // belong to this scenario's current grid and method list.
    let target_bits: HashSet<u64> = arr_targets.iter().map(|a| a.to_bits()).collect();
    let existing: Vec<RepetitionRecord> = options
        .resume
        .clone()
        .unwrap_or_default()
        .into_iter()
        .filter(|r| {
            r.scenario == spec.name
                && target_bits.contains(&r.arr1.to_bits())
                && r.rep < spec.repetitions
                && spec.methods.contains(&r.method)
        })
        .collect();
    let done: HashSet<(u64, usize, MethodId)> = existing
        .iter()
        .map(|r| (r.arr1.to_bits(), r.rep, r.method))
        .collect();

    let mut tasks: Vec<(usize, usize, Vec<MethodId>)> = Vec::new();
    for (arr_index, &arr1) in arr_targets.iter().enumerate() {
        for rep in 0..spec.repetitions {
            let missing: Vec<MethodId> = spec
                .methods
                .iter()
                .copied()
                .filter(|&m| !done.contains(&(arr1.to_bits(), rep, m)))
                .collect();
            if !missing.is_empty() {
                tasks.push((arr_index, rep, missing));
            }
        }
    }

    let run_tasks = |tasks: &[(usize, usize, Vec<MethodId>)]| -> Vec<Vec<RepetitionRecord>> {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|(arr_index, rep, methods)| {
                run_repetition(
                    spec,
                    *arr_index,
                    arr_targets[*arr_index],
                    betas[*arr_index],
                    *rep,
                    methods,
                    options.force_wide,
                )
            })
            .collect()
    };
    let fresh: Vec<Vec<RepetitionRecord>> = match options.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?
            .install(|| run_tasks(&tasks)),
        None => run_tasks(&tasks),
    };

    let mut records = existing;
    records.extend(fresh.into_iter().flatten());
    records.sort_by(|a, b| {
        a.arr1
            .partial_cmp(&b.arr1)
            .unwrap()
            .then(a.rep.cmp(&b.rep))
            .then(a.method.ordinal().cmp(&b.method.ordinal()))
    });

    let seeds: Vec<SeedEntry> = arr_targets
        .iter()
        .enumerate()
        .flat_map(|(arr_index, &arr1)| {
            (0..spec.repetitions).map(move |rep| SeedEntry {
                arr_index,
                arr1,
                rep,
                seed: seed::repetition_seed(spec.base_seed, arr_index, rep),
            })
        })
        .collect();

    let aggregates = aggregate_records(&records, &spec.subgroup.variables(), spec.alpha);
    let errored = records.iter().filter(|r| r.errored).count();
    let errored_fraction = if records.is_empty() {
        0.0
    } else {
        errored as f64 / records.len() as f64
    };

    Ok(RunOutcome {
        records,
        aggregates,
        seeds,
        arr_targets,
        errored_fraction,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Write a run's files into `dir`: `records.csv`, `importance.csv`,
/// `aggregates.csv`, `seeds.csv`, and `run_meta.txt`.
pub fn write_outputs(
    dir: &Path,
    spec: &ScenarioSpec,
    curve: &CalibrationCurve,
    outcome: &RunOutcome,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_records(&dir.join("records.csv"), &outcome.records)?;
    io::write_importance(&dir.join("importance.csv"), &outcome.records)?;
    io::write_aggregates(&dir.join("aggregates.csv"), &outcome.aggregates)?;
    io::write_seed_ledger(&dir.join("seeds.csv"), &outcome.seeds)?;
    let meta = vec![
        ("scenario".to_string(), spec.name.clone()),
        ("config_hash".to_string(), spec.config_hash()),
        ("horizon".to_string(), HORIZON.to_string()),
        ("alpha".to_string(), spec.alpha.to_string()),
        ("n".to_string(), spec.n.to_string()),
        ("validation_n".to_string(), spec.validation_n.to_string()),
        (
            "train_fraction".to_string(),
            spec.train_fraction.to_string(),
        ),
        ("arr_points".to_string(), spec.arr_points.to_string()),
        ("repetitions".to_string(), spec.repetitions.to_string()),
        (
            "methods".to_string(),
            spec.methods
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("base_seed".to_string(), spec.base_seed.to_string()),
        (
            "seed_scheme".to_string(),
            "splitmix64 mix of (base_seed, arr_index, rep); streams: \
             discovery=0, validation=1, fit=10+method, het=100+method"
                .to_string(),
        ),
        ("calibration_mc_n".to_string(), curve.mc_n.to_string()),
        ("calibration_seed".to_string(), curve.seed.to_string()),
        (
            "prevalence".to_string(),
            curve.prevalence.to_string(),
        ),
        (
            "arr_targets".to_string(),
            outcome
                .arr_targets
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        (
            "errored_fraction".to_string(),
            outcome.errored_fraction.to_string(),
        ),
        (
            "wall_seconds".to_string(),
            outcome.wall_seconds.to_string(),
        ),
    ];
    io::write_run_meta(&dir.join("run_meta.txt"), &meta)?;
    Ok(())
}

/// Recompute aggregate rows from a records CSV (optionally restoring
/// importance vectors from the sibling CSV so ranking metrics can be
/// recomputed too). With both files and the predictive set supplied, the
/// result is identical to the `aggregates.csv` the run wrote.
pub fn report(
    records_path: &Path,
    importance_path: Option<&Path>,
    predictive_set: &[usize],
    alpha: f64,
) -> Result<Vec<AggregateRow>> {
    let mut records = io::read_records(records_path)?;
    if let Some(imp) = importance_path {
        let table = io::read_importance(imp)?;
        io::attach_importance(&mut records, &table);
    }
    Ok(aggregate_records(&records, predictive_set, alpha))
}
