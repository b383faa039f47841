use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The Monte-Carlo error budget was too large to decide.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// Reported only; does not enter the overall status.
    pub informational: bool,
}

impl Check {
    pub fn new(name: &str, ok: bool, detail: String) -> Self {
        Self { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail, informational: false }
    }

    pub fn info(mut self) -> Self {
        self.informational = true;
        self
    }
}

/// Result of one experiment run: parameters, a numeric table and the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub status: Status,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub columns: Vec<String>,
    /// Missing entries are NaN in memory and `null` in JSON.
    #[serde(with = "nan_as_null")]
    pub rows: Vec<Vec<f64>>,
    pub fitted: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Vec<Option<f64>>> = rows.iter().map(|r| r.iter().map(|&x| (!x.is_nan()).then_some(x)).collect()).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let opt = Vec::<Vec<Option<f64>>>::deserialize(d)?;
        Ok(opt.into_iter().map(|r| r.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect()).collect())
    }
}

/// Column layout of the table of each experiment.
pub fn schema(experiment: &str) -> Option<&'static [&'static str]> {
    Some(match experiment {
        "count-check" => &["T", "weighted_sum", "vol_dt", "ratio", "rel_change", "classes", "identity_sum"],
        "equidist-check" => &["T", "observable", "torus_mean", "torus_se", "haar_mean", "haar_se", "ratio", "rel_error"],
        "non-escape" => &["T", "R", "torus_mass_above", "haar_mass_above"],
        "angular" => &["t", "psi", "empirical", "reference", "reference_se", "error", "regular_count", "vol"],
        "volume" => &["t", "s", "vol", "vol_strip", "strip_ratio", "logvol_over_t", "logslope"],
        _ => return None,
    })
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, params: BTreeMap<String, String>) -> Result<Self> {
        let columns = schema(experiment)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {experiment:?}")))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        Ok(Self {
            experiment: experiment.into(),
            status: Status::Pass,
            params,
            seed,
            columns,
            rows: Vec::new(),
            fitted: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            wall_time_s: 0.0,
        })
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Overall status from the non-informational checks.
    pub fn finish(&mut self, started: std::time::Instant) {
        let counted = self.checks.iter().filter(|c| !c.informational);
        let mut status = Status::Pass;
        for c in counted {
            match c.status {
                Status::Fail => status = Status::Fail,
                Status::Inconclusive if status == Status::Pass => status = Status::Inconclusive,
                _ => {}
            }
        }
        self.status = status;
        self.wall_time_s = started.elapsed().as_secs_f64();
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The numeric table as CSV, header first. An empty report yields the header only.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|x| x.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|rec| {
                rec?.iter().map(|s| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok((header, rows))
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!("{} [{:?}] in {:.1}s\n", self.experiment, self.status, self.wall_time_s);
        for c in &self.checks {
            let tag = if c.informational { " (info)" } else { "" };
            s.push_str(&format!("  {:?}{tag} {}: {}\n", c.status, c.name, c.detail));
        }
        for (k, v) in &self.fitted {
            s.push_str(&format!("  fitted {k} = {v:.6}\n"));
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn same(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits() || (p.is_nan() && q.is_nan())))
    }

    #[test]
    fn empty_report_gives_a_header() {
        let r = ExperimentReport::new("count-check", 1, BTreeMap::new()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim().split(',').count(), schema("count-check").unwrap().len());
    }

    #[test]
    fn csv_and_json_round_trips() {
        for id in ["count-check", "equidist-check", "non-escape", "angular", "volume"] {
            let mut r = ExperimentReport::new(id, 3, BTreeMap::new()).unwrap();
            let n = r.columns.len();
            r.push_row((0..n).map(|i| 0.1 * i as f64 + 1.0 / 3.0).collect());
            r.push_row((0..n).map(|i| if i == 1 { f64::NAN } else { 1e-17 * i as f64 }).collect());
            r.checks.push(Check::new("x", true, "fine".into()).info());
            r.finish(std::time::Instant::now());
            let mut buf = Vec::new();
            r.write_csv(&mut buf).unwrap();
            let (h, rows) = ExperimentReport::read_csv(buf.as_slice()).unwrap();
            assert_eq!(h, r.columns);
            assert!(same(&rows, &r.rows));
            let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
            assert!(same(&back.rows, &r.rows));
            assert_eq!(back.checks, r.checks);
        }
        assert!(ExperimentReport::new("nope", 0, BTreeMap::new()).is_err());
    }

    #[test]
    fn status_ignores_informational_checks() {
        let mut r = ExperimentReport::new("volume", 0, BTreeMap::new()).unwrap();
        r.checks.push(Check::new("a", false, String::new()).info());
        r.finish(std::time::Instant::now());
        assert_eq!(r.status, Status::Pass);
        r.checks.push(Check { status: Status::Inconclusive, ..Check::new("b", true, String::new()) });
        r.finish(std::time::Instant::now());
        assert_eq!(r.status, Status::Inconclusive);
        r.checks.push(Check::new("c", false, String::new()));
        r.finish(std::time::Instant::now());
        assert_eq!(r.status, Status::Fail);
    }
}
