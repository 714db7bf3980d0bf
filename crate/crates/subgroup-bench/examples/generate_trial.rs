//! Generate one synthetic trial and inspect what the generator controls.
//!
//! The data-generating process draws covariates, a fair-coin treatment arm,
//! and an event time from a proportional-hazards law in which treatment
//! benefit differs between an analyst-invisible subgroup (coefficient
//! `beta1`) and its complement (`beta0`). A scaled-Beta censoring time is
//! optional.
//!
//! ```bash
//! cargo run --example generate_trial
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use subgroup_bench::dgp::{generate_trial, CensoringConfig, GeneratorConfig};

fn main() -> subgroup_bench::Result<()> {
    // Start from the stock null configuration: 20 independent standard
    // normal covariates, the published prognostic vector, and the subgroup
    // "last four covariates all >= -1" (about half the population).
    let mut config = GeneratorConfig::gaussian_null(20)?;

    // Give the subgroup a treatment benefit and the rest a slight harm.
    // In a calibrated study these two numbers come off a CalibrationCurve
    // (see the calibrate_curve example); here they are just illustrative.
    config.beta0 = 1.0;
    config.beta1 = -3.0;

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let trial = generate_trial(&config, 2_000, &mut rng);

    let n = trial.n() as f64;
    let treated = trial.w.iter().filter(|&&w| w).count();
    let truth = trial.true_subgroup.as_ref().expect("generator stores it");
    let in_group = truth.iter().filter(|&&g| g).count();
    let events = trial.event.iter().filter(|&&e| e).count();

    println!("subgroup rule: {}", config.subgroup);
    println!("n = {}, p = {}", trial.n(), trial.p());
    println!("treated arm: {treated} ({:.1}%)", 100.0 * treated as f64 / n);
    println!(
        "true subgroup: {in_group} ({:.1}%, population prevalence ~50%)",
        100.0 * in_group as f64 / n
    );
    println!("events observed: {events} (no censoring -> every time is an event)");

    // Median observed time per (arm x subgroup) cell: the subgroup benefits
    // under treatment (longer times), everyone else is slightly harmed.
    println!("\nmedian event time by cell:");
    for (label, g_val, w_val) in [
        ("control, outside", false, false),
        ("treated, outside", false, true),
        ("control, in subgroup", true, false),
        ("treated, in subgroup", true, true),
    ] {
        let cell: Vec<f64> = (0..trial.n())
            .filter(|&i| truth[i] == g_val && trial.w[i] == w_val)
            .map(|i| trial.time[i])
            .collect();
        println!("  {label:22} {:.3}", subgroup_bench::stats::median(&cell));
    }

    // The same configuration with heavy early censoring.
    config.censoring = Some(CensoringConfig::scaled_beta(0.2, 2.0));
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let censored = generate_trial(&config, 2_000, &mut rng);
    let censored_events = censored.event.iter().filter(|&&e| e).count();
    println!(
        "\nwith C = 20 * Beta(0.2, 2.0) censoring: {censored_events} events ({:.1}%)",
        100.0 * censored_events as f64 / n
    );

    // Trials round-trip through CSV (columns x1..xp, w, time, event, true_g).
    let path = std::env::temp_dir().join("generate_trial_example.csv");
    trial.to_csv(&path)?;
    println!("\nwrote {}", path.display());
    Ok(())
}
