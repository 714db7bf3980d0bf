//! CSV and metadata files written by a benchmark run.
//!
//! - `records.csv` — one row per (ARR point, repetition, method):
//!   `scenario,arr1,rep,method,het_p,degenerate,top_var,accuracy,fit_seconds,rule`.
//!   `het_p` and `accuracy` are empty when absent; `degenerate` is 0/1;
//!   `top_var` is the 1-based index of the top-ranked variable, `0` when the
//!   method emitted an all-zero ranking, and empty when it emitted none;
//!   a failed fit stores `error: ...` in `rule`.
//! - `importance.csv` — the per-variable scores behind `top_var`, one row per
//!   variable: `scenario,arr1,rep,method,var_index,score` (`var_index` is
//!   1-based, matching the `x` names used in rules).
//! - `aggregates.csv` — `scenario,arr1,method,metric,mean,half_width,count`.
//! - `seeds.csv` — the seed ledger: `arr_index,arr1,rep,seed`; regenerating
//!   any repetition from its row reproduces its records exactly.
//! - `run_meta.txt` — flat `key = value` run metadata.
//!
//! Floating-point columns use Rust's shortest round-trip formatting, so
//! values parse back bit-identically and resumed runs can key on them.

use std::collections::HashMap;
use std::path::Path;

use crate::methods::MethodId;
use crate::metrics::{AggregateRow, RepetitionRecord, TopRank};
use crate::{Error, Result};

pub const RECORDS_HEADER: [&str; 10] = [
    "scenario",
    "arr1",
    "rep",
    "method",
    "het_p",
    "degenerate",
    "top_var",
    "accuracy",
    "fit_seconds",
    "rule",
];

pub const IMPORTANCE_HEADER: [&str; 6] =
    ["scenario", "arr1", "rep", "method", "var_index", "score"];

pub const AGGREGATES_HEADER: [&str; 7] = [
    "scenario",
    "arr1",
    "method",
    "metric",
    "mean",
    "half_width",
    "count",
];

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt_f64(field: &str, what: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::validation(format!("bad {what} value `{field}`")))
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::validation(format!("bad {what} value `{field}`")))
}

fn parse_usize(field: &str, what: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| Error::validation(format!("bad {what} value `{field}`")))
}

fn parse_method(field: &str) -> Result<MethodId> {
    MethodId::from_name(field)
        .ok_or_else(|| Error::validation(format!("unknown method name `{field}`")))
}

fn check_header(got: &csv::StringRecord, want: &[&str], path: &Path) -> Result<()> {
    let got_fields: Vec<&str> = got.iter().collect();
    if got_fields != want {
        return Err(Error::validation(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            want.join(","),
            got_fields.join(",")
        )));
    }
    Ok(())
}

/// Write the records CSV. Rows keep the order given.
pub fn write_records(path: &Path, records: &[RepetitionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        let top_var = match r.top_var {
            None => String::new(),
            Some(TopRank::NoSignal) => "0".to_string(),
            Some(TopRank::Var(j)) => (j + 1).to_string(),
        };
        w.write_record([
            r.scenario.as_str(),
            &r.arr1.to_string(),
            &r.rep.to_string(),
            r.method.name(),
            &opt_f64(r.het_p),
            if r.het_degenerate { "1" } else { "0" },
            &top_var,
            &opt_f64(r.accuracy),
            &r.fit_seconds.to_string(),
            &r.rule,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a records CSV. Importance vectors are not stored here; use
/// [`read_importance`] and [`attach_importance`] to restore them.
pub fn read_records(path: &Path) -> Result<Vec<RepetitionRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = reader.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::validation(format!("{}: empty file", path.display())))??;
    check_header(&header, &RECORDS_HEADER, path)?;
    let mut out = Vec::new();
    for row in rows {
        let row = row?;
        if row.len() != RECORDS_HEADER.len() {
            return Err(Error::validation(format!(
                "{}: row with {} fields, expected {}",
                path.display(),
                row.len(),
                RECORDS_HEADER.len()
            )));
        }
        let top_var = match &row[6] {
            "" => None,
            "0" => Some(TopRank::NoSignal),
            s => Some(TopRank::Var(parse_usize(s, "top_var")? - 1)),
        };
        let rule = row[9].to_string();
        out.push(RepetitionRecord {
            scenario: row[0].to_string(),
            arr1: parse_f64(&row[1], "arr1")?,
            rep: parse_usize(&row[2], "rep")?,
            method: parse_method(&row[3])?,
            het_p: parse_opt_f64(&row[4], "het_p")?,
            het_degenerate: &row[5] == "1",
            top_var,
            importance: None,
            accuracy: parse_opt_f64(&row[7], "accuracy")?,
            fit_seconds: parse_f64(&row[8], "fit_seconds")?,
            errored: rule.starts_with("error:"),
            rule,
        });
    }
    Ok(out)
}

/// Write the sibling importance CSV (every variable of every record that
/// carries an importance vector, zeros included).
pub fn write_importance(path: &Path, records: &[RepetitionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(IMPORTANCE_HEADER)?;
    for r in records {
        let Some(imp) = &r.importance else { continue };
        for (j, score) in imp.iter().enumerate() {
            w.write_record([
                r.scenario.as_str(),
                &r.arr1.to_string(),
                &r.rep.to_string(),
                r.method.name(),
                &(j + 1).to_string(),
                &score.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Keyed importance vectors: (scenario, arr1 bits, rep, method) → scores.
pub type ImportanceTable = HashMap<(String, u64, usize, MethodId), Vec<f64>>;

/// Read an importance CSV into a lookup table.
pub fn read_importance(path: &Path) -> Result<ImportanceTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = reader.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::validation(format!("{}: empty file", path.display())))??;
    check_header(&header, &IMPORTANCE_HEADER, path)?;
    let mut table: HashMap<(String, u64, usize, MethodId), Vec<(usize, f64)>> = HashMap::new();
    for row in rows {
        let row = row?;
        if row.len() != IMPORTANCE_HEADER.len() {
            return Err(Error::validation(format!(
                "{}: row with {} fields, expected {}",
                path.display(),
                row.len(),
                IMPORTANCE_HEADER.len()
            )));
        }
        let key = (
            row[0].to_string(),
            parse_f64(&row[1], "arr1")?.to_bits(),
            parse_usize(&row[2], "rep")?,
            parse_method(&row[3])?,
        );
        let var = parse_usize(&row[4], "var_index")?;
        if var == 0 {
            return Err(Error::validation("var_index is 1-based; got 0"));
        }
        let score = parse_f64(&row[5], "score")?;
        table.entry(key).or_default().push((var - 1, score));
    }
    let mut out = ImportanceTable::new();
    for (key, mut pairs) in table {
        pairs.sort_by_key(|&(j, _)| j);
        let p = pairs.last().map(|&(j, _)| j + 1).unwrap_or(0);
        let mut vec = vec![0.0; p];
        for (j, score) in pairs {
            vec[j] = score;
        }
        out.insert(key, vec);
    }
    Ok(out)
}

/// Restore in-memory importance vectors onto records read from CSV.
pub fn attach_importance(records: &mut [RepetitionRecord], table: &ImportanceTable) {
    for r in records.iter_mut() {
        let key = (r.scenario.clone(), r.arr1.to_bits(), r.rep, r.method);
        if let Some(imp) = table.get(&key) {
            r.importance = Some(imp.clone());
        }
    }
}

/// Write the aggregates CSV in the order given.
pub fn write_aggregates(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATES_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.as_str(),
            &r.arr1.to_string(),
            r.method.name(),
            &r.metric,
            &r.mean.to_string(),
            &r.half_width.to_string(),
            &r.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read an aggregates CSV (used to verify report/run equivalence).
pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = reader.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::validation(format!("{}: empty file", path.display())))??;
    check_header(&header, &AGGREGATES_HEADER, path)?;
    let mut out = Vec::new();
    for row in rows {
        let row = row?;
        out.push(AggregateRow {
            scenario: row[0].to_string(),
            arr1: parse_f64(&row[1], "arr1")?,
            method: parse_method(&row[2])?,
            metric: row[3].to_string(),
            mean: parse_f64(&row[4], "mean")?,
            half_width: parse_f64(&row[5], "half_width")?,
            count: parse_usize(&row[6], "count")?,
        });
    }
    Ok(out)
}

/// One row of the seed ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedEntry {
    pub arr_index: usize,
    pub arr1: f64,
    pub rep: usize,
    pub seed: u64,
}

/// Write the seed ledger: `arr_index,arr1,rep,seed`.
pub fn write_seed_ledger(path: &Path, entries: &[SeedEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["arr_index", "arr1", "rep", "seed"])?;
    for e in entries {
        w.write_record([
            e.arr_index.to_string(),
            e.arr1.to_string(),
            e.rep.to_string(),
            e.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write flat `key = value` run metadata.
pub fn write_run_meta(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(k);
        text.push_str(" = ");
        text.push_str(v);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}
