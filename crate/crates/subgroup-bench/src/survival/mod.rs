//! Survival-analysis core: Cox proportional hazards, Kaplan-Meier curves,
//! and a difference-in-differences heterogeneity test.

mod cox;
mod did;
mod km;
pub(crate) mod linalg;

pub use cox::{cox_score_residuals, fit_cox, CoxFit, CoxOptions};
pub use did::{diff_in_diff_test, CellSummary, DiffInDiffTest};
pub use km::{kaplan_meier, SurvivalCurve};
