//! Published prognostic coefficient vectors for the three benchmark
//! dimensionalities.

use crate::error::Error;
use crate::Result;

/// Fills `gamma[lo..=hi]` (1-based inclusive bounds) with `value`.
fn fill(gamma: &mut [f64], lo: usize, hi: usize, value: f64) {
    for g in &mut gamma[lo - 1..hi] {
        *g = value;
    }
}

/// The benchmark's prognostic vector for `p` in {20, 100, 1000}.
///
/// Each vector mixes strong (±1), moderate (±0.1), weak (±0.01), and null
/// coefficients in balanced blocks, so the prognostic signal has the same
/// order of magnitude across dimensionalities while most covariates stay
/// pure noise. Other values of `p` have no published vector and error.
pub fn prognostic_vector(p: usize) -> Result<Vec<f64>> {
    let mut gamma = vec![0.0; p];
    match p {
        20 => {
            fill(&mut gamma, 1, 5, 1.0);
            fill(&mut gamma, 6, 10, -1.0);
        }
        100 => {
            fill(&mut gamma, 1, 5, 1.0);
            fill(&mut gamma, 6, 10, -1.0);
            fill(&mut gamma, 11, 15, 0.1);
            fill(&mut gamma, 16, 25, -0.1);
            fill(&mut gamma, 26, 30, 0.1);
            fill(&mut gamma, 31, 35, 0.01);
            fill(&mut gamma, 36, 45, -0.01);
            fill(&mut gamma, 46, 50, 0.01);
            fill(&mut gamma, 51, 55, -0.01);
            fill(&mut gamma, 56, 60, 0.01);
        }
        1000 => {
            fill(&mut gamma, 1, 10, 1.0);
            fill(&mut gamma, 11, 20, -1.0);
            fill(&mut gamma, 21, 70, 0.1);
            fill(&mut gamma, 71, 120, -0.1);
            fill(&mut gamma, 121, 320, 0.01);
            fill(&mut gamma, 321, 520, -0.01);
        }
        other => {
            return Err(Error::validation(format!(
                "no standard prognostic vector for p = {other} (have 20, 100, 1000)"
            )))
        }
    }
    Ok(gamma)
}
