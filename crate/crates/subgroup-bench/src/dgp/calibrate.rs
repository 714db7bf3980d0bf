//! Monte-Carlo calibration: mapping treatment coefficients to per-subgroup
//! absolute risk reductions, and inverting that map.
//!
//! For a coefficient value `b` applied to one side of the subgroup split,
//! the achieved ARR on that side is the conditional mean of the closed-form
//! individual ARR, estimated once over a common set of covariate draws for
//! every grid value (common random numbers, so the curve is smooth in `b`).
//! Inversion applies an isotonic projection (the true curves are monotone;
//! the Monte-Carlo ones can wiggle) followed by linear interpolation.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::dgp::GeneratorConfig;
use crate::error::Error;
use crate::Result;

/// Evenly spaced coefficient grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid {
            lo: -10.0,
            hi: 10.0,
            points: 201,
        }
    }
}

impl BetaGrid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.lo + k as f64 * step).collect()
    }
}

/// Settings for one calibration run.
#[derive(Debug, Clone)]
pub struct MonteCarloCalibration {
    pub grid: BetaGrid,
    /// Number of covariate draws shared by every grid point.
    pub mc_n: usize,
    pub seed: u64,
    /// Time at which ARR is evaluated.
    pub horizon: f64,
}

impl Default for MonteCarloCalibration {
    fn default() -> Self {
        MonteCarloCalibration {
            grid: BetaGrid::default(),
            mc_n: 100_000,
            seed: 0,
            horizon: 1.0,
        }
    }
}

impl MonteCarloCalibration {
    /// Estimates both ARR curves for `config`'s population (the `beta0`,
    /// `beta1`, and censoring fields are ignored: ARR is a property of the
    /// uncensored outcome model).
    pub fn run(&self, config: &GeneratorConfig) -> Result<CalibrationCurve> {
        config.validate()?;
        if self.mc_n < 100 {
            return Err(Error::validation("mc_n must be at least 100"));
        }
        if self.grid.points < 2 || !(self.grid.lo < self.grid.hi) {
            return Err(Error::validation("beta grid needs lo < hi and >= 2 points"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::validation("horizon must be positive"));
        }

        // One shared covariate sample. For each draw keep
        // base = exp(gamma' x) * h^2 / 2, so S_control = exp(-base) and
        // S_treated(b) = exp(-exp(b) * base).
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let p = config.covariates.p();
        let mut row = vec![0.0; p];
        let hh = self.horizon * self.horizon / 2.0;
        let mut base_in = Vec::new();
        let mut base_out = Vec::new();
        for _ in 0..self.mc_n {
            config.covariates.sample_row(&mut rng, &mut row);
            let gamma_x: f64 = row.iter().zip(&config.gamma).map(|(a, b)| a * b).sum();
            let base = gamma_x.exp() * hh;
            if config.subgroup.contains(&row) {
                base_in.push(base);
            } else {
                base_out.push(base);
            }
        }
        if base_in.is_empty() || base_out.is_empty() {
            return Err(Error::validation(
                "subgroup or complement is empty in the calibration sample",
            ));
        }
        let prevalence = base_in.len() as f64 / self.mc_n as f64;

        let betas = self.grid.values();
        let mean_arr = |bases: &[f64], eb: f64| -> f64 {
            let sum: f64 = bases
                .iter()
                .map(|&b| (-eb * b).exp() - (-b).exp())
                .sum();
            sum / bases.len() as f64
        };
        let pairs: Vec<(f64, f64)> = betas
            .par_iter()
            .map(|&b| {
                let eb = b.exp();
                (mean_arr(&base_out, eb), mean_arr(&base_in, eb))
            })
            .collect();
        let arr0: Vec<f64> = pairs.iter().map(|&(a, _)| a).collect();
        let arr1: Vec<f64> = pairs.iter().map(|&(_, a)| a).collect();

        Ok(CalibrationCurve::new(
            betas, arr0, arr1, prevalence, self.mc_n, self.seed, self.horizon, None,
        ))
    }
}

/// Nonincreasing isotonic projection by pool-adjacent-violators.
pub(crate) fn isotonic_nonincreasing(values: &[f64]) -> Vec<f64> {
    // Pool on the negated sequence, which must be nondecreasing.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((-v, 1));
        while blocks.len() >= 2 {
            let (s2, n2) = blocks[blocks.len() - 1];
            let (s1, n1) = blocks[blocks.len() - 2];
            if s2 / (n2 as f64) < s1 / (n1 as f64) {
                blocks.pop();
                blocks.pop();
                blocks.push((s1 + s2, n1 + n2));
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, n) in blocks {
        let mean = -(s / n as f64);
        out.extend(std::iter::repeat(mean).take(n));
    }
    out
}

/// ARR on the complement implied by a subgroup ARR under the overall-null
/// constraint `arr0 * (1 - prevalence) + arr1 * prevalence = 0`.
pub fn solve_null_constraint(arr1: f64, prevalence: f64) -> f64 {
    -arr1 * prevalence / (1.0 - prevalence)
}

/// Both ARR curves over the coefficient grid, with enough metadata to
/// reproduce and to invert them.
#[derive(Debug, Clone)]
pub struct CalibrationCurve {
    /// Coefficient grid, ascending.
    pub betas: Vec<f64>,
    /// Raw Monte-Carlo ARR on the complement at each grid value.
    pub arr0: Vec<f64>,
    /// Raw Monte-Carlo ARR inside the subgroup at each grid value.
    pub arr1: Vec<f64>,
    /// Subgroup share of the calibration sample.
    pub prevalence: f64,
    pub mc_n: usize,
    pub seed: u64,
    pub horizon: f64,
    /// Hash of the generating configuration, when produced via a scenario.
    pub config_hash: Option<String>,
    iso0: Vec<f64>,
    iso1: Vec<f64>,
}

impl CalibrationCurve {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        betas: Vec<f64>,
        arr0: Vec<f64>,
        arr1: Vec<f64>,
        prevalence: f64,
        mc_n: usize,
        seed: u64,
        horizon: f64,
        config_hash: Option<String>,
    ) -> CalibrationCurve {
        let iso0 = isotonic_nonincreasing(&arr0);
        let iso1 = isotonic_nonincreasing(&arr1);
        CalibrationCurve {
            betas,
            arr0,
            arr1,
            prevalence,
            mc_n,
            seed,
            horizon,
            config_hash,
            iso0,
            iso1,
        }
    }

    /// Isotonic (nonincreasing) projection of the complement curve.
    pub fn isotonic_arr0(&self) -> &[f64] {
        &self.iso0
    }

    /// Isotonic (nonincreasing) projection of the subgroup curve.
    pub fn isotonic_arr1(&self) -> &[f64] {
        &self.iso1
    }

    /// Largest adjustment the isotonic projection applied to either raw
    /// curve. Stays at Monte-Carlo-noise scale when the estimate is healthy.
    pub fn max_isotonic_adjustment(&self) -> f64 {
        let d0 = self
            .arr0
            .iter()
            .zip(&self.iso0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        let d1 = self
            .arr1
            .iter()
            .zip(&self.iso1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        d0.max(d1)
    }

    /// Largest ARR achievable inside the subgroup (at the grid's low end).
    pub fn max_arr1(&self) -> f64 {
        self.iso1[0]
    }

    /// Most negative ARR achievable on the complement (at the grid's high end).
    pub fn min_arr0(&self) -> f64 {
        *self.iso0.last().unwrap()
    }

    /// Largest subgroup ARR for which the overall-null constraint can still
    /// be satisfied on the complement side.
    pub fn max_null_constrained_arr1(&self) -> f64 {
        let own_limit = self.max_arr1();
        let complement_limit =
            -self.min_arr0() * (1.0 - self.prevalence) / self.prevalence;
        own_limit.min(complement_limit)
    }

    /// Coefficient achieving `target` ARR inside the subgroup.
    pub fn invert_arr1(&self, target: f64) -> Result<f64> {
        invert(&self.betas, &self.iso1, target, "arr1")
    }

    /// Coefficient achieving `target` ARR on the complement.
    pub fn invert_arr0(&self, target: f64) -> Result<f64> {
        invert(&self.betas, &self.iso0, target, "arr0")
    }

    /// The pair (beta0, beta1) that hits `arr1` in the subgroup while the
    /// overall ARR stays at zero.
    ///
    /// A target of exactly 0 returns (0, 0) without consulting the estimated
    /// curves: the ARR vanishes identically at zero coefficients, and the
    /// null grid point must be the exact null rather than an interpolation
    /// artifact.
    pub fn betas_for_arr1(&self, arr1: f64) -> Result<(f64, f64)> {
        if arr1 == 0.0 {
            return Ok((0.0, 0.0));
        }
        let beta1 = self.invert_arr1(arr1)?;
        let beta0 = self.invert_arr0(solve_null_constraint(arr1, self.prevalence))?;
        Ok((beta0, beta1))
    }

    /// Evenly spaced ARR targets from 0 to the constrained maximum, inclusive.
    pub fn arr_grid(&self, points: usize) -> Result<Vec<f64>> {
        if points < 2 {
            return Err(Error::validation("arr grid needs at least 2 points"));
        }
        let max = self.max_null_constrained_arr1();
        if !(max > 0.0) {
            return Err(Error::OutOfRange(format!(
                "no positive subgroup ARR is achievable (max = {max})"
            )));
        }
        Ok((0..points)
            .map(|i| max * i as f64 / (points - 1) as f64)
            .collect())
    }

    fn meta_path(path: &Path) -> PathBuf {
        let mut os = path.as_os_str().to_owned();
        os.push(".meta");
        PathBuf::from(os)
    }

    /// Writes `beta,arr0,arr1` rows plus a `<path>.meta` sidecar carrying the
    /// sample size, seed, prevalence, and horizon.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["beta", "arr0", "arr1"])?;
        for k in 0..self.betas.len() {
            wtr.write_record(&[
                format!("{}", self.betas[k]),
                format!("{}", self.arr0[k]),
                format!("{}", self.arr1[k]),
            ])?;
        }
        wtr.flush()?;

        let mut meta = std::fs::File::create(Self::meta_path(path))?;
        writeln!(meta, "mc_n = {}", self.mc_n)?;
        writeln!(meta, "seed = {}", self.seed)?;
        writeln!(meta, "prevalence = {}", self.prevalence)?;
        writeln!(meta, "horizon = {}", self.horizon)?;
        if let Some(h) = &self.config_hash {
            writeln!(meta, "config_hash = {h}")?;
        }
        Ok(())
    }

    /// Reads a curve written by [`CalibrationCurve::to_csv`]; the sidecar is
    /// required because inversion needs the prevalence.
    pub fn from_csv(path: &Path) -> Result<CalibrationCurve> {
        let mut rdr = csv::Reader::from_path(path)?;
        {
            let headers = rdr.headers()?;
            if headers.iter().collect::<Vec<_>>() != ["beta", "arr0", "arr1"] {
                return Err(Error::validation(format!(
                    "expected header beta,arr0,arr1, found {headers:?}"
                )));
            }
        }
        let mut betas = Vec::new();
        let mut arr0 = Vec::new();
        let mut arr1 = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let f = |i: usize| -> Result<f64> {
                record[i]
                    .trim()
                    .parse()
                    .map_err(|_| Error::validation(format!("bad number {:?}", &record[i])))
            };
            betas.push(f(0)?);
            arr0.push(f(1)?);
            arr1.push(f(2)?);
        }
        if betas.len() < 2 {
            return Err(Error::validation("calibration curve needs >= 2 rows"));
        }
        if betas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("beta column must be strictly increasing"));
        }

        let meta_path = Self::meta_path(path);
        let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| {
            Error::validation(format!("missing sidecar {}: {e}", meta_path.display()))
        })?;
        let mut meta: BTreeMap<String, String> = BTreeMap::new();
        for line in meta_text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::validation(format!("bad meta line {line:?}")));
            };
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &str| -> Result<&String> {
            meta.get(key)
                .ok_or_else(|| Error::validation(format!("sidecar missing key {key:?}")))
        };
        let mc_n: usize = get("mc_n")?
            .parse()
            .map_err(|_| Error::validation("bad mc_n in sidecar"))?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|_| Error::validation("bad seed in sidecar"))?;
        let prevalence: f64 = get("prevalence")?
            .parse()
            .map_err(|_| Error::validation("bad prevalence in sidecar"))?;
        let horizon: f64 = get("horizon")?
            .parse()
            .map_err(|_| Error::validation("bad horizon in sidecar"))?;
        if !(0.0..1.0).contains(&prevalence) || prevalence == 0.0 {
            return Err(Error::validation("prevalence must be in (0, 1)"));
        }
        Ok(CalibrationCurve::new(
            betas,
            arr0,
            arr1,
            prevalence,
            mc_n,
            seed,
            horizon,
            meta.get("config_hash").cloned(),
        ))
    }
}

/// Linear-interpolation inverse of a nonincreasing curve. Targets beyond the
/// curve's range (past a small numeric slack) are errors.
fn invert(betas: &[f64], iso: &[f64], target: f64, what: &str) -> Result<f64> {
    let hi = iso[0];
    let lo = *iso.last().unwrap();
    let slack = 1e-9;
    if target > hi + slack || target < lo - slack {
        return Err(Error::OutOfRange(format!(
            "{what} target {target} outside achievable [{lo}, {hi}]"
        )));
    }
    let t = target.clamp(lo, hi);
    // First index whose value has dropped to t or below.
    let k = iso.partition_point(|&v| v > t);
    if k == 0 {
        return Ok(betas[0]);
    }
    let (y0, y1) = (iso[k - 1], iso[k]);
    if y0 == y1 {
        return Ok(betas[k - 1]);
    }
    Ok(betas[k - 1] + (betas[k] - betas[k - 1]) * (y0 - t) / (y0 - y1))
}
