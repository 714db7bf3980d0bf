//! Property tests for the exact (non-statistical) invariants: metric
//! definitions, estimator identities, seed-scheme stability, and
//! determinism of generation.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use subgroup_bench::dgp::{generate_trial, GeneratorConfig};
use subgroup_bench::harness::seed::{repetition_seed, stream_rng, STREAM_DISCOVERY};
use subgroup_bench::metrics::{average_precision, rejection_rate};
use subgroup_bench::survival::{diff_in_diff_test, kaplan_meier};

// ---------------------------------------------------------------------------
// Average precision against an independent enumeration of the PR points.

/// Brute-force AP: walk the ranking in descending score order (ties broken
/// by smaller index, mirroring a stable sort) and average the precision at
/// each true positive.
fn brute_force_ap(scores: &[f64], labels: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut tp = 0usize;
    let mut precisions = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] {
            tp += 1;
            precisions.push(tp as f64 / (rank + 1) as f64);
        }
    }
    precisions.iter().sum::<f64>() / precisions.len() as f64
}

/// Every labeled set of size <= 4 (with at least one positive), exhaustively.
#[test]
fn average_precision_matches_brute_force_exhaustively() {
    let score_sets: &[&[f64]] = &[
        &[0.5, 0.5, 0.5, 0.5],
        &[4.0, 3.0, 2.0, 1.0],
        &[1.0, 2.0, 3.0, 4.0],
        &[2.0, 2.0, 1.0, 1.0],
        &[0.0, 1.0, 0.0, 1.0],
    ];
    for m in 1..=4usize {
        for mask in 1u32..(1 << m) {
            let labels: Vec<bool> = (0..m).map(|j| mask >> j & 1 == 1).collect();
            for scores in score_sets {
                let scores = &scores[..m];
                let got = average_precision(scores, &labels).unwrap();
                let want = brute_force_ap(scores, &labels);
                assert!(
                    (got - want).abs() < 1e-12,
                    "m={m} mask={mask:b} scores={scores:?}: {got} vs {want}"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn average_precision_matches_brute_force_randomized(
        scores in prop::collection::vec(-1e3..1e3f64, 1..40),
        seed in any::<u64>(),
    ) {
        // Derive labels from the seed so some are ties-heavy, some sparse.
        let mut label_bits = seed;
        let labels: Vec<bool> = scores
            .iter()
            .map(|_| {
                label_bits = label_bits.wrapping_mul(6364136223846793005).wrapping_add(1);
                label_bits >> 62 == 3
            })
            .collect();
        prop_assume!(labels.iter().any(|&l| l));
        let got = average_precision(&scores, &labels).unwrap();
        let want = brute_force_ap(&scores, &labels);
        prop_assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn average_precision_is_one_iff_positives_lead(
        n_pos in 1usize..6,
        n_neg in 0usize..6,
    ) {
        // Positives strictly above every negative -> AP is exactly 1.
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for k in 0..n_pos {
            scores.push(10.0 + k as f64);
            labels.push(true);
        }
        for k in 0..n_neg {
            scores.push(1.0 + k as f64);
            labels.push(false);
        }
        let ap = average_precision(&scores, &labels).unwrap();
        prop_assert!((ap - 1.0).abs() < 1e-12);
    }

    // -----------------------------------------------------------------------
    // Rejection rate: monotone in alpha, and exact on constructed inputs.

    #[test]
    fn rejection_rate_monotone_in_alpha(
        pvalues in prop::collection::vec(0.0..=1.0f64, 1..200),
        a1 in 0.0..1.0f64,
        a2 in 0.0..1.0f64,
    ) {
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let r_lo = rejection_rate(&pvalues, lo).unwrap();
        let r_hi = rejection_rate(&pvalues, hi).unwrap();
        prop_assert!(r_lo.mean <= r_hi.mean + 1e-15);
    }

    #[test]
    fn rejection_counts_strictly_below_alpha(
        below in 0usize..50,
        at in 0usize..5,
        above in 0usize..50,
    ) {
        prop_assume!(below + at + above > 0);
        let alpha = 0.05;
        let mut pvalues = vec![alpha / 2.0; below];
        pvalues.extend(std::iter::repeat_n(alpha, at));
        pvalues.extend(std::iter::repeat_n(0.9, above));
        let est = rejection_rate(&pvalues, alpha).unwrap();
        let want = below as f64 / (below + at + above) as f64;
        prop_assert!((est.mean - want).abs() < 1e-15);
    }

    // -----------------------------------------------------------------------
    // Kaplan-Meier reduces to 1 - ECDF when every subject has an event.

    #[test]
    fn km_is_one_minus_ecdf_without_censoring(
        times in prop::collection::vec(0.001..50.0f64, 1..60),
        probe in 0.0..60.0f64,
    ) {
        let events = vec![true; times.len()];
        let km = kaplan_meier(&times, &events).unwrap();
        let n = times.len() as f64;
        let ecdf = times.iter().filter(|&&t| t <= probe).count() as f64 / n;
        prop_assert!((km.eval(probe) - (1.0 - ecdf)).abs() < 1e-9);
        for &t in &times {
            let ecdf_t = times.iter().filter(|&&s| s <= t).count() as f64 / n;
            prop_assert!((km.eval(t) - (1.0 - ecdf_t)).abs() < 1e-9);
        }
    }

    // -----------------------------------------------------------------------
    // Difference-in-differences symmetries. Cells are built with >= 2
    // subjects so the non-degenerate path is exercised deterministically.

    #[test]
    fn did_is_invariant_to_flipping_both_labels(
        cell_times in prop::collection::vec(
            prop::collection::vec(0.01..20.0f64, 2..12), 4..=4
        ),
    ) {
        let mut times = Vec::new();
        let mut w = Vec::new();
        let mut g = Vec::new();
        for (cell, values) in cell_times.iter().enumerate() {
            for &t in values {
                times.push(t);
                g.push(cell >= 2);
                w.push(cell % 2 == 1);
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let base = diff_in_diff_test(&times, &w, &g, &mut rng);

        // Swapping subgroup labels AND arms leaves the contrast intact.
        let w_flip: Vec<bool> = w.iter().map(|&v| !v).collect();
        let g_flip: Vec<bool> = g.iter().map(|&v| !v).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let flipped = diff_in_diff_test(&times, &w_flip, &g_flip, &mut rng);

        prop_assert!(!base.degenerate && !flipped.degenerate);
        prop_assert!((base.statistic - flipped.statistic).abs() < 1e-12);
        prop_assert!((base.p_value - flipped.p_value).abs() < 1e-12);
    }

    #[test]
    fn did_is_invariant_to_subject_order(
        cell_times in prop::collection::vec(
            prop::collection::vec(0.01..20.0f64, 2..10), 4..=4
        ),
        rotate in 0usize..40,
    ) {
        let mut times = Vec::new();
        let mut w = Vec::new();
        let mut g = Vec::new();
        for (cell, values) in cell_times.iter().enumerate() {
            for &t in values {
                times.push(t);
                g.push(cell >= 2);
                w.push(cell % 2 == 1);
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let base = diff_in_diff_test(&times, &w, &g, &mut rng);

        let k = rotate % times.len();
        let rot = |v: &[f64]| -> Vec<f64> { [&v[k..], &v[..k]].concat() };
        let rot_b = |v: &[bool]| -> Vec<bool> { [&v[k..], &v[..k]].concat() };
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let rotated = diff_in_diff_test(&rot(&times), &rot_b(&w), &rot_b(&g), &mut rng);

        prop_assert!((base.statistic - rotated.statistic).abs() < 1e-12);
        prop_assert!((base.p_value - rotated.p_value).abs() < 1e-12);
    }

    // -----------------------------------------------------------------------
    // Seeding: distinct repetition coordinates get distinct seeds, and
    // generation is a pure function of the seed.

    #[test]
    fn repetition_seeds_do_not_collide_locally(base in any::<u64>()) {
        let mut seen = std::collections::HashSet::new();
        for arr in 0..12usize {
            for rep in 0..64usize {
                prop_assert!(
                    seen.insert(repetition_seed(base, arr, rep)),
                    "collision at arr={arr} rep={rep}"
                );
            }
        }
    }

    #[test]
    fn trial_generation_is_a_pure_function_of_the_seed(seed in any::<u64>()) {
        let config = GeneratorConfig::gaussian_null(20).unwrap();
        let a = generate_trial(&config, 40, &mut stream_rng(seed, STREAM_DISCOVERY));
        let b = generate_trial(&config, 40, &mut stream_rng(seed, STREAM_DISCOVERY));
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(&a.time, &b.time);
        prop_assert_eq!(&a.w, &b.w);
        // A different stream of the same seed gives different data.
        let c = generate_trial(&config, 40, &mut stream_rng(seed, STREAM_DISCOVERY + 1));
        prop_assert!(a.time != c.time);
    }
}
