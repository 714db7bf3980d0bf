//! Map treatment coefficients to absolute risk reduction and back.
//!
//! The subgroup's treatment effect is easiest to reason about as the
//! absolute risk reduction at t = 1 (ARR: survival gain from treatment),
//! but the generator takes hazard coefficients. Calibration estimates the
//! coefficient-to-ARR curves once by Monte Carlo and inverts them, so a
//! study can be specified in ARR units. A null constraint picks the
//! out-of-subgroup coefficient so that the population-average ARR is zero:
//! heterogeneity without a whole-population effect.
//!
//! ```bash
//! cargo run --release --example calibrate_curve
//! ```

use subgroup_bench::dgp::{
    solve_null_constraint, BetaGrid, GeneratorConfig, MonteCarloCalibration,
};

fn main() -> subgroup_bench::Result<()> {
    let config = GeneratorConfig::gaussian_null(20)?;

    // A deliberately small Monte-Carlo size so the example runs in seconds;
    // production curves use the default mc_n = 100_000 (error ~ 1/sqrt(N)).
    let calibration = MonteCarloCalibration {
        grid: BetaGrid::default(), // 201 points on [-10, 10]
        mc_n: 20_000,
        seed: 0,
        horizon: 1.0,
    };
    let curve = calibration.run(&config)?;

    println!(
        "calibrated {} grid points at N = {} draws (prevalence {:.3})",
        curve.betas.len(),
        curve.mc_n,
        curve.prevalence
    );
    println!("\n  beta     ARR0(beta)   ARR1(beta)");
    for &beta in &[-10.0, -4.0, -2.0, 0.0, 2.0, 10.0] {
        let k = curve
            .betas
            .iter()
            .position(|b| (b - beta).abs() < 1e-9)
            .expect("grid point");
        println!(
            "  {beta:>5.1}   {:>9.4}   {:>9.4}",
            curve.arr0[k], curve.arr1[k]
        );
    }
    println!(
        "\nlargest achievable subgroup ARR on this grid: {:.4}",
        curve.max_arr1()
    );

    // Invert: which coefficients realize a subgroup ARR of 0.30 while the
    // population-average ARR stays zero?
    let target = 0.30;
    let (beta0, beta1) = curve.betas_for_arr1(target)?;
    let arr0 = solve_null_constraint(target, curve.prevalence);
    println!("\ntarget subgroup ARR1 = {target}");
    println!("  null constraint forces ARR0 = {arr0:.4}");
    println!("  inverted coefficients: beta0 = {beta0:.4}, beta1 = {beta1:.4}");

    // The benchmark's grid of heterogeneity strengths: evenly spaced ARR1
    // targets from 0 (exact null) to the largest value the null constraint
    // still allows.
    let grid = curve.arr_grid(10)?;
    let printable: Vec<String> = grid.iter().map(|v| format!("{v:.3}")).collect();
    println!("\n10-point benchmark ARR grid: {}", printable.join(", "));

    // Curves persist to CSV (with a .meta sidecar holding seed, N, and the
    // scenario fingerprint) so runs never re-pay the Monte-Carlo cost.
    let path = std::env::temp_dir().join("calibrate_curve_example.csv");
    curve.to_csv(&path)?;
    println!("\nwrote {}", path.display());
    Ok(())
}
