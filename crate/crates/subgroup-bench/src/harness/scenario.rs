//! Scenario files: a flat `key = value` description of one benchmark
//! experiment (generator shape, sample sizes, ARR grid, repetitions,
//! methods, seeds).
//!
//! Unknown and duplicate keys are hard errors so that config drift is caught
//! at parse time rather than silently ignored. Lines starting with `#` and
//! blank lines are comments.
//!
//! ```text
//! name = desk
//! p = 20
//! gamma = standard
//! subgroup = x17 >= -1 & x18 >= -1 & x19 >= -1 & x20 >= -1
//! covariates = gaussian
//! censoring = none
//! n = 500
//! repetitions = 100
//! methods = all
//! ```

use std::collections::HashSet;
use std::path::Path;

use crate::dgp::{
    prognostic_vector, CensoringConfig, CovariateSource, Direction, GeneratorConfig,
    SubgroupClause, SubgroupDefinition,
};
use crate::methods::MethodId;
use crate::{Error, Result};

/// A parsed scenario: everything the harness needs except the calibrated
/// `(beta0, beta1)` pairs, which come from a calibration curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub p: usize,
    pub gamma: Vec<f64>,
    pub subgroup: SubgroupDefinition,
    pub covariates: CovariateSource,
    pub censoring: Option<CensoringConfig>,
    /// Discovery-set size.
    pub n: usize,
    /// Validation-set size (defaults to `n`).
    pub validation_n: usize,
    /// Fraction of the discovery set used for fitting by train/test methods.
    pub train_fraction: f64,
    /// Number of evenly spaced ARR grid points, including the null point.
    pub arr_points: usize,
    pub repetitions: usize,
    pub methods: Vec<MethodId>,
    pub base_seed: u64,
    pub alpha: f64,
}

impl ScenarioSpec {
    /// Parse a scenario file.
    pub fn from_file(path: &Path) -> Result<ScenarioSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read scenario file {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        ScenarioSpec::parse(&text, base)
    }

    /// Parse scenario text; relative `file:` / `matrix:` paths resolve
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<ScenarioSpec> {
        let mut seen: HashSet<String> = HashSet::new();
        let mut name = None;
        let mut p: Option<usize> = None;
        let mut gamma_raw = String::from("standard");
        let mut subgroup_raw: Option<String> = None;
        let mut covariates_raw = String::from("gaussian");
        let mut censoring_raw = String::from("none");
        let mut n = 500usize;
        let mut validation_n: Option<usize> = None;
        let mut train_fraction = 0.5f64;
        let mut arr_points = 10usize;
        let mut repetitions = 100usize;
        let mut methods_raw = String::from("all");
        let mut base_seed = 0u64;
        let mut alpha = 0.05f64;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !seen.insert(key.clone()) {
                return Err(Error::config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            let at = |what: &str| format!("line {}: key `{key}`: {what}", lineno + 1);
            match key.as_str() {
                "name" => name = Some(value),
                "p" => p = Some(parse_num(&value).map_err(|e| Error::config(at(&e)))?),
                "gamma" => gamma_raw = value,
                "subgroup" => subgroup_raw = Some(value),
                "covariates" => covariates_raw = value,
                "censoring" => censoring_raw = value,
                "n" => n = parse_num(&value).map_err(|e| Error::config(at(&e)))?,
                "validation_n" => {
                    validation_n = Some(parse_num(&value).map_err(|e| Error::config(at(&e)))?)
                }
                "train_fraction" => {
                    train_fraction = parse_num(&value).map_err(|e| Error::config(at(&e)))?
                }
                "arr_points" => {
                    arr_points = parse_num(&value).map_err(|e| Error::config(at(&e)))?
                }
                "repetitions" => {
                    repetitions = parse_num(&value).map_err(|e| Error::config(at(&e)))?
                }
                "methods" => methods_raw = value,
                "base_seed" => {
                    base_seed = parse_num(&value).map_err(|e| Error::config(at(&e)))?
                }
                "alpha" => alpha = parse_num(&value).map_err(|e| Error::config(at(&e)))?,
                _ => {
                    return Err(Error::config(format!(
                        "line {}: unknown key `{key}`",
                        lineno + 1
                    )))
                }
            }
        }

        let name = name.ok_or_else(|| Error::config("missing required key `name`"))?;
        let p = p.ok_or_else(|| Error::config("missing required key `p`"))?;
        let subgroup_raw =
            subgroup_raw.ok_or_else(|| Error::config("missing required key `subgroup`"))?;

        let gamma = parse_gamma(&gamma_raw, p, base_dir)?;
        let subgroup = parse_subgroup(&subgroup_raw, p)?;
        let covariates = parse_covariates(&covariates_raw, p, base_dir)?;
        let censoring = parse_censoring(&censoring_raw)?;
        let methods = parse_methods(&methods_raw)?;

        let spec = ScenarioSpec {
            name,
            p,
            gamma,
            subgroup,
            covariates,
            censoring,
            n,
            validation_n: validation_n.unwrap_or(n),
            train_fraction,
            arr_points,
            repetitions,
            methods,
            base_seed,
            alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("scenario name must be nonempty"));
        }
        if self.gamma.len() != self.p {
            return Err(Error::config(format!(
                "gamma has {} entries but p = {}",
                self.gamma.len(),
                self.p
            )));
        }
        if !(0.0..1.0).contains(&self.train_fraction) || self.train_fraction == 0.0 {
            return Err(Error::config("train_fraction must lie strictly in (0, 1)"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        if self.arr_points == 0 {
            return Err(Error::config("arr_points must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods list must be nonempty"));
        }
        if self.n < 4 || self.validation_n < 1 {
            return Err(Error::config("n must be >= 4 and validation_n >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha must lie strictly in (0, 1)"));
        }
        // Delegate generator-side checks (subgroup indices, censoring shapes).
        self.generator_config(0.0, 0.0).validate()?;
        Ok(())
    }

    /// The generator for this scenario at one calibrated coefficient pair.
    pub fn generator_config(&self, beta0: f64, beta1: f64) -> GeneratorConfig {
        GeneratorConfig {
            covariates: self.covariates.clone(),
            gamma: self.gamma.clone(),
            subgroup: self.subgroup.clone(),
            beta0,
            beta1,
            censoring: self.censoring.clone(),
        }
    }

    /// Whether the configured method list needs the wide-data guard
    /// (exhaustive-search methods on p > 30).
    pub fn wide_search_methods(&self) -> Vec<MethodId> {
        if self.p <= 30 {
            return Vec::new();
        }
        self.methods
            .iter()
            .copied()
            .filter(|m| matches!(m, MethodId::Sides | MethodId::SeqBt))
            .collect()
    }

    /// Hash of the generator identity (dimension, prognostic vector,
    /// subgroup, covariate source). Calibration curves record it so a curve
    /// is never silently reused for a different generator. Censoring and
    /// harness knobs are excluded: they do not affect the calibration map.
    pub fn config_hash(&self) -> String {
        let mut h = Fnv::new();
        h.update(b"p=");
        h.update(self.p.to_string().as_bytes());
        h.update(b";gamma=");
        for g in &self.gamma {
            h.update(format!("{g:?},").as_bytes());
        }
        h.update(b";subgroup=");
        h.update(self.subgroup.to_string().as_bytes());
        h.update(b";covariates=");
        match &self.covariates {
            CovariateSource::Gaussian { p } => {
                h.update(b"gaussian:");
                h.update(p.to_string().as_bytes());
            }
            CovariateSource::Empirical { rows } => {
                h.update(b"matrix:");
                for row in rows.rows() {
                    for v in row {
                        h.update(format!("{v:?},").as_bytes());
                    }
                    h.update(b"|");
                }
            }
        }
        format!("{:016x}", h.finish())
    }
}

/// FNV-1a 64-bit accumulator.
struct Fnv(u64);

impl Fnv {
    fn new() -> Fnv {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("cannot parse `{value}`"))
}

fn parse_gamma(raw: &str, p: usize, base_dir: &Path) -> Result<Vec<f64>> {
    if raw == "standard" {
        return prognostic_vector(p).map_err(|_| {
            Error::config(format!(
                "gamma = standard requires p in {{20, 100, 1000}}; \
                 got p = {p} (use gamma = list:... or file:...)"
            ))
        });
    }
    let values: Vec<f64> = if let Some(list) = raw.strip_prefix("list:") {
        list.split(',')
            .map(|v| parse_num(v.trim()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config(format!("gamma list: {e}")))?
    } else if let Some(path) = raw.strip_prefix("file:") {
        let path = base_dir.join(path.trim());
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::config(format!("cannot read gamma file {}: {e}", path.display()))
        })?;
        text.split([',', '\n', ' ', '\t', '\r'])
            .filter(|t| !t.is_empty())
            .map(parse_num)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config(format!("gamma file: {e}")))?
    } else {
        return Err(Error::config(format!(
            "gamma must be `standard`, `list:v1,v2,...`, or `file:path`; got `{raw}`"
        )));
    };
    if values.len() != p {
        return Err(Error::config(format!(
            "gamma has {} entries but p = {p}",
            values.len()
        )));
    }
    Ok(values)
}

/// Parse `x17 >= -1 & x3 <= 0.5` into a conjunction of clauses.
/// Variable names are 1-based `x` names; directions are `>=` and `<=`.
pub fn parse_subgroup(raw: &str, p: usize) -> Result<SubgroupDefinition> {
    let mut clauses = Vec::new();
    for part in raw.split('&') {
        let clause = part.trim();
        let (var_text, direction, threshold_text) = if let Some((v, t)) = clause.split_once(">=") {
            (v, Direction::Ge, t)
        } else if let Some((v, t)) = clause.split_once("<=") {
            (v, Direction::Le, t)
        } else {
            return Err(Error::config(format!(
                "subgroup clause `{clause}` must contain `>=` or `<=`"
            )));
        };
        let var_text = var_text.trim();
        let index: usize = var_text
            .strip_prefix(['x', 'X'])
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| {
                Error::config(format!(
                    "subgroup clause `{clause}`: variable must be x<k> with k >= 1"
                ))
            })?;
        if index == 0 || index > p {
            return Err(Error::config(format!(
                "subgroup clause `{clause}`: x{index} outside 1..={p}"
            )));
        }
        let threshold: f64 = parse_num(threshold_text.trim())
            .map_err(|e| Error::config(format!("subgroup clause `{clause}`: {e}")))?;
        clauses.push(SubgroupClause {
            var: index - 1,
            direction,
            threshold,
        });
    }
    let mut seen = HashSet::new();
    for c in &clauses {
        if !seen.insert(c.var) {
            return Err(Error::config(format!(
                "subgroup uses x{} in more than one clause",
                c.var + 1
            )));
        }
    }
    Ok(SubgroupDefinition { clauses })
}

fn parse_covariates(raw: &str, p: usize, base_dir: &Path) -> Result<CovariateSource> {
    if raw == "gaussian" {
        return Ok(CovariateSource::Gaussian { p });
    }
    if let Some(path) = raw.strip_prefix("matrix:") {
        let path = base_dir.join(path.trim());
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::config(format!(
                "cannot read covariate matrix {}: {e}",
                path.display()
            ))
        })?;
        let mut flat = Vec::new();
        let mut n_rows = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|v| parse_num(v.trim()))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| {
                    Error::config(format!(
                        "covariate matrix {} line {}: {e}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
            if row.len() != p {
                return Err(Error::config(format!(
                    "covariate matrix {} line {}: {} columns, expected p = {p}",
                    path.display(),
                    lineno + 1,
                    row.len()
                )));
            }
            flat.extend(row);
            n_rows += 1;
        }
        if n_rows == 0 {
            return Err(Error::config("covariate matrix has no rows"));
        }
        let rows = ndarray::Array2::from_shape_vec((n_rows, p), flat)
            .expect("row-major flat buffer matches (n_rows, p)");
        return Ok(CovariateSource::Empirical { rows });
    }
    Err(Error::config(format!(
        "covariates must be `gaussian` or `matrix:path`; got `{raw}`"
    )))
}

fn parse_censoring(raw: &str) -> Result<Option<CensoringConfig>> {
    if raw == "none" {
        return Ok(None);
    }
    if let Some(shapes) = raw.strip_prefix("beta:") {
        let parts: Vec<&str> = shapes.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::config(format!(
                "censoring = beta:a,b needs exactly two shapes; got `{raw}`"
            )));
        }
        let a: f64 = parse_num(parts[0]).map_err(Error::config)?;
        let b: f64 = parse_num(parts[1]).map_err(Error::config)?;
        return Ok(Some(CensoringConfig::scaled_beta(a, b)));
    }
    Err(Error::config(format!(
        "censoring must be `none` or `beta:a,b`; got `{raw}`"
    )))
}

fn parse_methods(raw: &str) -> Result<Vec<MethodId>> {
    if raw == "all" {
        return Ok(MethodId::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in raw.split(',') {
        let name = name.trim();
        let id = MethodId::from_name(name).ok_or_else(|| {
            Error::config(format!(
                "unknown method `{name}` (known: {}, or `all`)",
                MethodId::ALL
                    .iter()
                    .map(|m| m.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
        if out.contains(&id) {
            return Err(Error::config(format!("method `{name}` listed twice")));
        }
        out.push(id);
    }
    Ok(out)
}
