//! Trial data container and its CSV round-trip.

use std::path::Path;

use ndarray::Array2;

use crate::error::Error;
use crate::Result;

/// One two-arm trial: covariates, treatment assignment, observed time,
/// event indicator, and (for synthetic data) the true subgroup label.
#[derive(Debug, Clone)]
pub struct TrialData {
    /// Covariate matrix, one row per subject.
    pub x: Array2<f64>,
    /// Treatment arm (`true` = treated).
    pub w: Vec<bool>,
    /// Observed time: event time or censoring time, whichever came first.
    pub time: Vec<f64>,
    /// `true` when the observed time is an event, `false` when censored.
    pub event: Vec<bool>,
    /// Ground-truth subgroup membership, when known.
    pub true_subgroup: Option<Vec<bool>>,
}

impl TrialData {
    /// Number of subjects.
    pub fn n(&self) -> usize {
        self.time.len()
    }

    /// Number of covariates.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Checks the internal invariants: equal lengths, finite nonnegative
    /// times, finite covariates.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.x.nrows() != n || self.w.len() != n || self.event.len() != n {
            return Err(Error::validation(format!(
                "inconsistent lengths: x has {} rows, w {}, time {}, event {}",
                self.x.nrows(),
                self.w.len(),
                n,
                self.event.len()
            )));
        }
        if let Some(g) = &self.true_subgroup {
            if g.len() != n {
                return Err(Error::validation("true_subgroup length mismatch"));
            }
        }
        if self.time.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::validation("times must be finite and nonnegative"));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("covariates must be finite"));
        }
        Ok(())
    }

    /// Returns the rows at `indices` as a new trial, preserving order.
    pub fn subset(&self, indices: &[usize]) -> TrialData {
        let p = self.p();
        let mut x = Array2::zeros((indices.len(), p));
        for (r, &i) in indices.iter().enumerate() {
            x.row_mut(r).assign(&self.x.row(i));
        }
        TrialData {
            x,
            w: indices.iter().map(|&i| self.w[i]).collect(),
            time: indices.iter().map(|&i| self.time[i]).collect(),
            event: indices.iter().map(|&i| self.event[i]).collect(),
            true_subgroup: self
                .true_subgroup
                .as_ref()
                .map(|g| indices.iter().map(|&i| g[i]).collect()),
        }
    }

    /// Splits into (first `k` rows, remaining rows) without reshuffling.
    /// Generated rows are already i.i.d., so a prefix split is a random split.
    pub fn split_at(&self, k: usize) -> (TrialData, TrialData) {
        let head: Vec<usize> = (0..k.min(self.n())).collect();
        let tail: Vec<usize> = (k.min(self.n())..self.n()).collect();
        (self.subset(&head), self.subset(&tail))
    }

    /// Writes `x1..xp,w,time,event[,true_g]` with one row per subject.
    /// Booleans are written as `0`/`1`.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut wtr = csv::Writer::from_path(path)?;
        let p = self.p();
        let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
        header.extend(["w".into(), "time".into(), "event".into()]);
        if self.true_subgroup.is_some() {
            header.push("true_g".into());
        }
        wtr.write_record(&header)?;
        for i in 0..self.n() {
            let mut row: Vec<String> = (0..p).map(|j| format!("{}", self.x[[i, j]])).collect();
            row.push(if self.w[i] { "1" } else { "0" }.into());
            row.push(format!("{}", self.time[i]));
            row.push(if self.event[i] { "1" } else { "0" }.into());
            if let Some(g) = &self.true_subgroup {
                row.push(if g[i] { "1" } else { "0" }.into());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a file written by [`TrialData::to_csv`]. The header is checked
    /// literally: covariate columns must be `x1..xp` in order, followed by
    /// `w,time,event` and an optional `true_g`.
    pub fn from_csv(path: &Path) -> Result<TrialData> {
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        let p = header.iter().take_while(|h| h.starts_with('x')).count();
        for (j, h) in header.iter().take(p).enumerate() {
            let expect = format!("x{}", j + 1);
            if *h != expect {
                return Err(Error::validation(format!(
                    "covariate column {} is named {h:?}, expected {expect:?}",
                    j + 1
                )));
            }
        }
        let rest: Vec<&str> = header[p..].iter().map(|s| s.as_str()).collect();
        let has_g = match rest.as_slice() {
            ["w", "time", "event"] => false,
            ["w", "time", "event", "true_g"] => true,
            other => {
                return Err(Error::validation(format!(
                    "expected trailing columns w,time,event[,true_g], found {other:?}"
                )))
            }
        };

        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(format!("bad {what} value {s:?}")))
        };
        let parse_bool = |s: &str, what: &str| -> Result<bool> {
            match s.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::validation(format!(
                    "bad {what} value {other:?} (want 0 or 1)"
                ))),
            }
        };

        let mut xs: Vec<f64> = Vec::new();
        let mut w = Vec::new();
        let mut time = Vec::new();
        let mut event = Vec::new();
        let mut g = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::validation(format!(
                    "row has {} fields, header has {}",
                    record.len(),
                    header.len()
                )));
            }
            for j in 0..p {
                xs.push(parse_f64(&record[j], "covariate")?);
            }
            w.push(parse_bool(&record[p], "w")?);
            time.push(parse_f64(&record[p + 1], "time")?);
            event.push(parse_bool(&record[p + 2], "event")?);
            if has_g {
                g.push(parse_bool(&record[p + 3], "true_g")?);
            }
        }
        let n = time.len();
        let x = Array2::from_shape_vec((n, p), xs)
            .map_err(|e| Error::validation(format!("covariate shape: {e}")))?;
        let data = TrialData {
            x,
            w,
            time,
            event,
            true_subgroup: if has_g { Some(g) } else { None },
        };
        data.validate()?;
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy() -> TrialData {
        TrialData {
            x: array![[0.5, -1.25], [1.5, 2.0], [-0.5, 0.0]],
            w: vec![true, false, true],
            time: vec![1.0, 2.5, 0.75],
            event: vec![true, false, true],
            true_subgroup: Some(vec![true, false, false]),
        }
    }

    #[test]
    fn csv_round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trial.csv");
        let data = toy();
        data.to_csv(&path).unwrap();
        let back = TrialData::from_csv(&path).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.p(), 2);
        assert_eq!(back.x, data.x);
        assert_eq!(back.w, data.w);
        assert_eq!(back.time, data.time);
        assert_eq!(back.event, data.event);
        assert_eq!(back.true_subgroup, data.true_subgroup);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x3,w,time,event\n0,0,1,1.0,1\n").unwrap();
        assert!(TrialData::from_csv(&path).is_err());
    }

    #[test]
    fn subset_and_split_keep_order() {
        let data = toy();
        let sub = data.subset(&[2, 0]);
        assert_eq!(sub.time, vec![0.75, 1.0]);
        assert_eq!(sub.w, vec![true, true]);
        let (head, tail) = data.split_at(1);
        assert_eq!(head.n(), 1);
        assert_eq!(tail.n(), 2);
        assert_eq!(tail.time, vec![2.5, 0.75]);
    }

    #[test]
    fn validate_rejects_negative_time() {
        let mut data = toy();
        data.time[1] = -0.1;
        assert!(data.validate().is_err());
    }
}
