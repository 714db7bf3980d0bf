//! Reproduce any single repetition of a benchmark run from its seed.
//!
//! Every repetition owns a seed mixed from (base_seed, ARR index, rep), and
//! every consumer inside the repetition draws from its own numbered stream
//! of that seed. The run's seeds.csv ledger records each repetition seed, so
//! any record in a finished run can be regenerated in isolation — no need to
//! replay the run, and no dependence on worker count or method subset.
//!
//! ```bash
//! cargo run --example reproduce_repetition
//! ```

use std::path::Path;

use subgroup_bench::dgp::{generate_trial, BetaGrid, MonteCarloCalibration};
use subgroup_bench::harness::seed::{repetition_seed, stream_rng, STREAM_DISCOVERY};
use subgroup_bench::harness::{run_benchmark, run_repetition, RunOptions, ScenarioSpec};
use subgroup_bench::methods::MethodId;

fn main() -> subgroup_bench::Result<()> {
    let spec = ScenarioSpec::parse(
        "\
name = repro-demo
p = 20
gamma = standard
subgroup = x17 >= -1 & x18 >= -1 & x19 >= -1 & x20 >= -1
n = 150
repetitions = 4
arr_points = 2
methods = univariate_interaction, oracle
base_seed = 99
",
        Path::new("."),
    )?;
    let calibration = MonteCarloCalibration {
        grid: BetaGrid::default(),
        mc_n: 10_000,
        seed: 0,
        horizon: 1.0,
    };
    let mut curve = calibration.run(&spec.generator_config(0.0, 0.0))?;
    curve.config_hash = Some(spec.config_hash());

    let outcome = run_benchmark(&spec, &curve, &RunOptions::default())?;

    // Pick one cell of the run: the strongest ARR point, repetition 2.
    let arr_index = outcome.arr_targets.len() - 1;
    let arr1 = outcome.arr_targets[arr_index];
    let rep = 2;

    // The ledger stores exactly this derivation.
    let seed = repetition_seed(spec.base_seed, arr_index, rep);
    let ledger_row = outcome
        .seeds
        .iter()
        .find(|s| s.arr_index == arr_index && s.rep == rep)
        .expect("every (arr, rep) pair is in the ledger");
    assert_eq!(ledger_row.seed, seed);
    println!("repetition (arr_index={arr_index}, rep={rep}) has seed {seed}");

    // Regenerate the repetition's discovery dataset bit for bit: stream 0
    // of the repetition seed drives the discovery draw.
    let betas = curve.betas_for_arr1(arr1)?;
    let config = spec.generator_config(betas.0, betas.1);
    let data = generate_trial(&config, spec.n, &mut stream_rng(seed, STREAM_DISCOVERY));
    println!(
        "regenerated discovery data: n = {}, first time = {:.6}",
        data.n(),
        data.time[0]
    );

    // Re-run the whole repetition in isolation and compare against the
    // records the full run produced (fit timing is wall clock and may
    // differ; everything else must be identical).
    let alone = run_repetition(&spec, arr_index, arr1, betas, rep, &spec.methods, false);
    for record in &alone {
        let from_run = outcome
            .records
            .iter()
            .find(|r| {
                r.arr1.to_bits() == record.arr1.to_bits()
                    && r.rep == record.rep
                    && r.method == record.method
            })
            .expect("record exists in the full run");
        assert_eq!(record.het_p, from_run.het_p);
        assert_eq!(record.top_var, from_run.top_var);
        assert_eq!(record.accuracy, from_run.accuracy);
        assert_eq!(record.rule, from_run.rule);
        println!(
            "  {:<24} het_p {:?} matches the full run",
            record.method.name(),
            record.het_p.map(|p| (p * 1e4).round() / 1e4)
        );
    }

    // The same guarantee holds for any method subset: oracle alone at the
    // same cell produces the byte-identical oracle record.
    let only_oracle = run_repetition(&spec, arr_index, arr1, betas, rep, &[MethodId::Oracle], false);
    assert_eq!(only_oracle[0].het_p, alone[1].het_p);
    println!("oracle-only rerun matches: records do not depend on the method subset");
    Ok(())
}
