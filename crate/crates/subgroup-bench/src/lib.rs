//! Calibrated synthetic survival trials and a benchmark of subgroup
//! discovery methods.
//!
//! The crate has four layers, each usable on its own:
//!
//! * [`survival`] — Cox proportional hazards (ridge-penalized, Breslow ties),
//!   Kaplan-Meier curves, and a difference-in-differences heterogeneity test
//!   on observed times.
//! * [`dgp`] — a two-arm trial generator with a known subgroup of good
//!   responders, plus the Monte-Carlo calibration that maps a target absolute
//!   risk reduction (ARR) in that subgroup to the hazard coefficients that
//!   produce it exactly, under an overall-null constraint.
//! * [`methods`] — nine subgroup discovery methods (univariate tests,
//!   multivariate Cox/tree S-learners, MOB, ITree, SIDES, SeqBT, ARDP) and an
//!   oracle that knows the true subgroup.
//! * [`metrics`] + [`harness`] — rejection rates, variable-ranking scores,
//!   classification accuracy, and a deterministic, resumable benchmark runner
//!   with CSV outputs.
//!
//! ```
//! use rand::SeedableRng;
//! use subgroup_bench::dgp::{GeneratorConfig, generate_trial};
//! use subgroup_bench::survival::kaplan_meier;
//!
//! let config = GeneratorConfig::gaussian_null(20).unwrap();
//! let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
//! let trial = generate_trial(&config, 200, &mut rng);
//! let km = kaplan_meier(&trial.time, &trial.event).unwrap();
//! assert!(km.eval(1.0) > 0.0 && km.eval(1.0) <= 1.0);
//! ```

pub mod data;
pub mod dgp;
pub mod error;
pub mod harness;
pub mod methods;
pub mod metrics;
pub mod stats;
pub mod survival;

pub use data::TrialData;
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
