//! End-to-end benchmark on a reduced scale: scenario text -> calibration ->
//! seeded parallel run -> aggregate table -> files on disk.
//!
//! This is the library equivalent of the CLI pipeline
//! (`calibrate` / `run` / `report`) and finishes in about a minute in
//! release mode. The full-protocol desk scenario is the same text with
//! n = 500, repetitions = 100, arr_points = 10, and all ten methods.
//!
//! ```bash
//! cargo run --release --example small_benchmark
//! ```

use std::path::Path;

use subgroup_bench::dgp::{BetaGrid, MonteCarloCalibration};
use subgroup_bench::harness::{report, run_benchmark, write_outputs, RunOptions, ScenarioSpec};

fn main() -> subgroup_bench::Result<()> {
    // Scenarios are flat key = value text; unknown keys are rejected so
    // config drift fails loudly. The same text parses from a file via
    // ScenarioSpec::from_file.
    let spec = ScenarioSpec::parse(
        "\
name = small-demo
p = 20
gamma = standard
subgroup = x17 >= -1 & x18 >= -1 & x19 >= -1 & x20 >= -1
n = 200
validation_n = 200
train_fraction = 0.5
arr_points = 3
repetitions = 10
methods = univariate_interaction, multivariate_cox, mob, oracle
base_seed = 2024
alpha = 0.05
",
        Path::new("."),
    )?;

    // Calibrate the coefficient-to-ARR map for this scenario's population.
    // Small N keeps the example fast; the curve records the scenario's
    // config hash so a run with a mismatched curve is refused.
    let calibration = MonteCarloCalibration {
        grid: BetaGrid::default(),
        mc_n: 20_000,
        seed: 0,
        horizon: 1.0,
    };
    let mut curve = calibration.run(&spec.generator_config(0.0, 0.0))?;
    curve.config_hash = Some(spec.config_hash());

    // Run the grid. Everything is deterministic given the scenario text:
    // worker count, method subsets, and resumption cannot change a record.
    let outcome = run_benchmark(&spec, &curve, &RunOptions::default())?;
    println!(
        "{} records ({} ARR points x {} reps x {} methods) in {:.1}s\n",
        outcome.records.len(),
        outcome.arr_targets.len(),
        spec.repetitions,
        spec.methods.len(),
        outcome.wall_seconds
    );

    // The aggregate table: one row per (arr1, method, metric).
    println!(
        "{:>6}  {:<24} {:<14} {:>8} {:>12} {:>6}",
        "arr1", "method", "metric", "mean", "half_width", "count"
    );
    for row in &outcome.aggregates {
        println!(
            "{:>6.3}  {:<24} {:<14} {:>8.3} {:>12.3} {:>6}",
            row.arr1, row.method.name(), row.metric, row.mean, row.half_width, row.count
        );
    }

    // Persist the run: records.csv, importance.csv, aggregates.csv,
    // seeds.csv (one ledger row per repetition), run_meta.txt.
    let dir = std::env::temp_dir().join("small_benchmark_example");
    write_outputs(&dir, &spec, &curve, &outcome)?;
    println!("\nwrote {}", dir.display());

    // `report` recomputes the aggregate table from the records file alone
    // and must reproduce the in-memory table exactly.
    let recomputed = report(
        &dir.join("records.csv"),
        Some(&dir.join("importance.csv")),
        &spec.subgroup.variables(),
        spec.alpha,
    )?;
    assert_eq!(recomputed, outcome.aggregates);
    println!("report round-trip: recomputed aggregates match");
    Ok(())
}
