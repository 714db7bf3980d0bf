//! Fit every subgroup-discovery method on one heterogeneous trial.
//!
//! Shows the method-level API beneath the benchmark: each method consumes a
//! trial and yields an optional internal heterogeneity p-value, an optional
//! covariate-importance vector, and an optional subgroup predictor. Methods
//! that only propose subgroups (multivariate Cox/tree, SIDES, SeqBT, ARDP)
//! are fit on a train split here and their proposal is tested on the
//! held-out half with the difference-in-differences test — exactly the
//! protocol the benchmark harness runs.
//!
//! ```bash
//! cargo run --release --example run_methods
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use subgroup_bench::dgp::{generate_trial, GeneratorConfig};
use subgroup_bench::methods::{fit_method, FitContext, MethodId};
use subgroup_bench::metrics::{classification_accuracy, top_rank_of, TopRank};
use subgroup_bench::survival::diff_in_diff_test;

fn main() -> subgroup_bench::Result<()> {
    // Strong heterogeneity: subgroup ARR near the top of the feasible range
    // (coefficients of this size come from a calibration curve; see the
    // calibrate_curve example).
    let mut config = GeneratorConfig::gaussian_null(20)?;
    config.beta0 = 1.77;
    config.beta1 = -4.0;

    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let discovery = generate_trial(&config, 500, &mut rng);
    let validation = generate_trial(&config, 500, &mut rng);
    let (train, test) = discovery.split_at(250);

    let ctx = FitContext {
        oracle: Some(&config.subgroup),
        ..FitContext::default()
    };

    println!("true subgroup: {} (predictive vars x17..x20)\n", config.subgroup);
    println!(
        "{:<24} {:>10} {:>8} {:>9}  rule",
        "method", "het_p", "top_var", "accuracy"
    );

    for method in MethodId::ALL {
        let fit_data = if method.needs_holdout() {
            &train
        } else {
            &discovery
        };
        let mut fit_rng = ChaCha12Rng::seed_from_u64(100 + method.ordinal() as u64);
        let result = fit_method(method, fit_data, &ctx, &mut fit_rng)?;

        // Internal p-value, or a held-out test of the proposed subgroup.
        let het_p = match (result.het_p, &result.predictor) {
            (Some(p), _) => Some(p),
            (None, Some(pred)) => {
                let membership = pred.predict(&test);
                Some(diff_in_diff_test(&test.time, &test.w, &membership, &mut fit_rng).p_value)
            }
            (None, None) => None,
        };

        let top = result.importance.as_deref().map(top_rank_of);
        let accuracy = result
            .predictor
            .as_ref()
            .and_then(|p| classification_accuracy(p, &validation).ok());
        let rule = result
            .predictor
            .as_ref()
            .map(|p| p.description())
            .unwrap_or_default();

        println!(
            "{:<24} {:>10} {:>8} {:>9}  {}",
            method.name(),
            het_p.map_or("-".into(), |p| format!("{p:.2e}")),
            match top {
                Some(TopRank::Var(j)) => format!("x{}", j + 1),
                Some(TopRank::NoSignal) => "none".into(),
                None => "-".into(),
            },
            accuracy.map_or("-".into(), |a| format!("{a:.3}")),
            truncate(&rule, 44),
        );
    }
    Ok(())
}

fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        format!("{}...", &s[..max])
    }
}
