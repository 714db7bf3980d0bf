//! The metric layer: how repetition records become the three headline
//! numbers — rejection rate, top-rank accuracy, and average precision.
//!
//! ```bash
//! cargo run --example ranking_metrics
//! ```

use subgroup_bench::metrics::{
    average_precision, mean_estimate, proportion_estimate, rejection_rate, top_rank_hit,
    top_rank_of, TopRank,
};

fn main() -> subgroup_bench::Result<()> {
    // --- Rejection rate (RQ1: does heterogeneity exist?) -------------------
    // 100 heterogeneity p-values from a hypothetical method; 50 fall below
    // alpha = 0.05. The estimate carries its binomial 95% half-width:
    // 1.96 * sqrt(0.5 * 0.5 / 100) = 0.098.
    let pvalues: Vec<f64> = (0..100)
        .map(|i| if i < 50 { 0.01 } else { 0.50 })
        .collect();
    let power = rejection_rate(&pvalues, 0.05)?;
    println!(
        "rejection rate: {:.2} +/- {:.3} over {} repetitions",
        power.mean, power.half_width, power.count
    );

    // --- Variable ranking (RQ2: which covariates drive the effect?) --------
    // An importance vector over p = 8 covariates; truth says variables
    // x5..x8 (0-based 4..7) are the predictive ones.
    let predictive = [4usize, 5, 6, 7];
    // x3 (a decoy) outranks two of the four truly predictive variables.
    let importance = [0.1, 0.0, 1.5, 0.2, 5.0, 2.0, 0.05, 0.9];
    match top_rank_of(&importance) {
        TopRank::Var(j) => println!("\ntop-ranked variable: x{}", j + 1),
        TopRank::NoSignal => println!("\nall-zero importance: counted as a miss"),
    }
    println!(
        "top-rank hit: {}",
        top_rank_hit(&importance, &predictive)
    );

    // Average precision rewards rankings that put every predictive variable
    // early, not just the first one. The labels mark predictive positions.
    let labels: Vec<bool> = (0..8).map(|j| predictive.contains(&j)).collect();
    let ap = average_precision(&importance, &labels)?;
    println!("average precision of the full ranking: {ap:.3}");

    // A perfect ranking scores 1; pushing one predictive variable to the
    // bottom costs precision at its rank.
    let perfect = [0.0, 0.0, 0.0, 0.0, 4.0, 3.0, 2.0, 1.0];
    println!(
        "perfect ranking scores {:.3}",
        average_precision(&perfect, &labels)?
    );

    // --- Aggregation building blocks ---------------------------------------
    // Proportions (rejections, top-rank hits) get binomial half-widths;
    // continuous metrics (accuracy, timings) get normal ones.
    let acc = mean_estimate(&[0.71, 0.74, 0.69, 0.77, 0.72]);
    println!(
        "\nmean accuracy {:.3} +/- {:.3} over {} repetitions",
        acc.mean, acc.half_width, acc.count
    );
    let hit = proportion_estimate(93, 100);
    println!(
        "top-rank accuracy {:.2} +/- {:.3}",
        hit.mean, hit.half_width
    );
    Ok(())
}
