//! Thin command-line front end over the `subgroup_bench` library.
//!
//! Subcommands mirror the library's four entry points: `calibrate` estimates
//! the coefficient-to-ARR curves for a scenario, `generate` materializes one
//! trial dataset at a chosen ARR, `run` executes the full benchmark grid, and
//! `report` recomputes aggregate tables from a records file.
//!
//! Exit codes: 0 on success, 2 for configuration errors (malformed scenario
//! or calibration files, mismatched hashes, invalid flag combinations), 3
//! when a run finished but more than 10% of its records errored, 1 for
//! everything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subgroup_bench::dgp::{generate_trial, BetaGrid, CalibrationCurve, MonteCarloCalibration};
use subgroup_bench::harness::seed::{stream_rng, STREAM_DISCOVERY};
use subgroup_bench::harness::{io, report, run_benchmark, write_outputs, RunOptions, ScenarioSpec};
use subgroup_bench::Error;

#[derive(Parser)]
#[command(
    name = "subgroup-bench",
    about = "Calibrated synthetic survival trials and a benchmark of subgroup discovery methods",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the ARR-vs-coefficient calibration curves for a scenario.
    Calibrate(CalibrateArgs),
    /// Generate one trial dataset at a chosen subgroup ARR.
    Generate(GenerateArgs),
    /// Run the benchmark over the ARR grid and write its output files.
    Run(RunArgs),
    /// Recompute aggregate tables from a records CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    /// Scenario file (key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Number of evenly spaced coefficient grid points on [-10, 10].
    #[arg(long, default_value_t = 201)]
    grid_points: usize,
    /// Monte-Carlo draws shared by every grid point.
    #[arg(long, default_value_t = 100_000)]
    mc_n: usize,
    /// Seed for the Monte-Carlo draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output curve CSV (a `.meta` sidecar is written next to it).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario file (key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Calibration curve CSV produced by `calibrate` for this scenario.
    #[arg(long)]
    calibration: PathBuf,
    /// Target subgroup ARR at t = 1; coefficients are read off the curve.
    #[arg(long)]
    arr1: f64,
    /// Repetition seed. The generator is seeded exactly as the benchmark
    /// seeds a repetition's discovery draw, so a seed taken from a run's
    /// seeds.csv reproduces that repetition's discovery dataset bit for bit.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset CSV (columns x1..xp, w, time, event, true_g).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Calibration curve CSV produced by `calibrate` for this scenario.
    #[arg(long)]
    calibration: PathBuf,
    /// Override the scenario's repetition count.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Continue an interrupted run: completed (arr, rep, method) records in
    /// `<out-dir>/records.csv` are kept and only missing work is executed.
    #[arg(long)]
    resume: bool,
    /// Allow SIDES and SeqBT on scenarios with more than 30 covariates.
    #[arg(long)]
    force: bool,
    /// Directory for records.csv, importance.csv, aggregates.csv, seeds.csv,
    /// and run_meta.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Records CSV from a run.
    #[arg(long)]
    records: PathBuf,
    /// Matching importance CSV; required for the variable-ranking rows
    /// (top_rank, avg_precision).
    #[arg(long)]
    importance: Option<PathBuf>,
    /// 1-based indices of the truly predictive variables (e.g. 17,18,19,20),
    /// used to score variable rankings. Without it ranking rows are skipped.
    #[arg(long, value_delimiter = ',')]
    predictive_vars: Vec<usize>,
    /// Rejection threshold for the reject_rate rows.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Output aggregates CSV.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Calibrate(args) => calibrate(args),
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Report(args) => run_report(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) | Error::Validation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn calibrate(args: CalibrateArgs) -> Result<ExitCode, Error> {
    let spec = ScenarioSpec::from_file(&args.scenario)?;
    let calib = MonteCarloCalibration {
        grid: BetaGrid {
            points: args.grid_points,
            ..BetaGrid::default()
        },
        mc_n: args.mc_n,
        seed: args.seed,
        ..MonteCarloCalibration::default()
    };
    let mut curve = calib.run(&spec.generator_config(0.0, 0.0))?;
    curve.config_hash = Some(spec.config_hash());
    curve.to_csv(&args.out)?;
    println!(
        "calibrated {} grid points at N={} (seed {}): prevalence {:.4}, max ARR1 {:.4}, max null-constrained ARR1 {:.4}",
        curve.betas.len(),
        curve.mc_n,
        curve.seed,
        curve.prevalence,
        curve.max_arr1(),
        curve.max_null_constrained_arr1(),
    );
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

/// `run` and `generate` both refuse a curve calibrated for a different
/// generator than the scenario describes.
fn check_hash(spec: &ScenarioSpec, curve: &CalibrationCurve) -> Result<(), Error> {
    if let Some(recorded) = &curve.config_hash {
        if *recorded != spec.config_hash() {
            return Err(Error::config(format!(
                "calibration was computed for config hash {recorded}, scenario hashes to {}; recalibrate",
                spec.config_hash()
            )));
        }
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<ExitCode, Error> {
    let spec = ScenarioSpec::from_file(&args.scenario)?;
    let curve = CalibrationCurve::from_csv(&args.calibration)?;
    check_hash(&spec, &curve)?;
    let (beta0, beta1) = curve.betas_for_arr1(args.arr1)?;
    let config = spec.generator_config(beta0, beta1);
    let mut rng = stream_rng(args.seed, STREAM_DISCOVERY);
    let data = generate_trial(&config, spec.n, &mut rng);
    data.to_csv(&args.out)?;
    println!(
        "generated n={} at ARR1={} (beta0={beta0:.4}, beta1={beta1:.4}), {} events",
        data.n(),
        args.arr1,
        data.event.iter().filter(|&&e| e).count(),
    );
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> Result<ExitCode, Error> {
    let mut spec = ScenarioSpec::from_file(&args.scenario)?;
    if let Some(reps) = args.reps {
        spec.repetitions = reps;
        spec.validate()?;
    }
    let curve = CalibrationCurve::from_csv(&args.calibration)?;
    let resume = if args.resume {
        let records_path = args.out_dir.join("records.csv");
        if records_path.exists() {
            let prior = io::read_records(&records_path)?;
            println!("resuming: {} completed records found", prior.len());
            Some(prior)
        } else {
            None
        }
    } else {
        None
    };
    let options = RunOptions {
        workers: args.workers,
        force_wide: args.force,
        resume,
    };
    let outcome = run_benchmark(&spec, &curve, &options)?;
    write_outputs(&args.out_dir, &spec, &curve, &outcome)?;
    println!(
        "ran {} records ({} ARR points x {} reps x {} methods) in {:.1}s",
        outcome.records.len(),
        outcome.arr_targets.len(),
        spec.repetitions,
        spec.methods.len(),
        outcome.wall_seconds,
    );
    println!("wrote {}", args.out_dir.display());
    if outcome.errored_fraction > 0.10 {
        eprintln!(
            "error: {:.1}% of records errored (threshold 10%)",
            100.0 * outcome.errored_fraction
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_report(args: ReportArgs) -> Result<ExitCode, Error> {
    for (pos, v) in args.predictive_vars.iter().enumerate() {
        if *v == 0 {
            return Err(Error::config(format!(
                "--predictive-vars entry {} is 0; variable indices are 1-based",
                pos + 1
            )));
        }
    }
    let predictive: Vec<usize> = args.predictive_vars.iter().map(|v| v - 1).collect();
    let rows = report(
        &args.records,
        args.importance.as_deref(),
        &predictive,
        args.alpha,
    )?;
    io::write_aggregates(&args.out, &rows)?;
    println!("wrote {} aggregate rows to {}", rows.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}
