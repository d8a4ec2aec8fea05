//! Rows, CSV output and the JSON run report.

use hm_lab::dgi::{ConstantsReport, Status};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Asserted,
    Reported,
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub suite: String,
    pub check: String,
    pub kind: Kind,
    pub value: f64,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub status: Status,
    pub seed: u64,
}

impl Row {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Wall-clock time of one suite phase; JSON only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub suite: String,
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
    #[serde(default)]
    pub timings: Vec<Timing>,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            config_hash: config.hash(),
            rows: Vec::new(),
            warnings: Vec::new(),
            wall_clock_s: 0.0,
            timings: Vec::new(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.passed())
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures().next().is_some() {
            1
        } else {
            0
        }
    }

    /// Seconds spent in `phase` of `suite`; the phase named after the suite covers all of it.
    pub fn seconds(&self, suite: &str, phase: &str) -> Option<f64> {
        self.timings.iter().find(|t| t.suite == suite && t.phase == phase).map(|t| t.seconds)
    }

    pub fn row(&self, suite: &str, check: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.suite == suite && r.check == check)
    }

    /// Deterministic for a fixed configuration: no timings, no thread count.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Counts of pass, fail and reported rows.
    pub fn tally(&self) -> (usize, usize, usize) {
        let count = |s| self.rows.iter().filter(|r| r.status == s).count();
        (count(Status::Pass), count(Status::Fail), count(Status::Reported))
    }
}

/// Rows of a constants report, with `prefix.` prepended to each name.
pub fn rows_from(suite: &str, prefix: &str, k: &ConstantsReport, seed: u64) -> Vec<Row> {
    k.ratios
        .iter()
        .map(|r| Row {
            suite: suite.into(),
            check: if prefix.is_empty() { r.name.clone() } else { format!("{prefix}.{}", r.name) },
            kind: if r.status == Status::Reported { Kind::Reported } else { Kind::Asserted },
            value: r.value,
            bound: r.bound,
            slack: r.slack,
            status: r.status,
            seed,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> RunReport {
        let mut k = ConstantsReport::new();
        k.assert_le("x", "x ≤ 1", 0.5, 1.0);
        k.report("y", "y", 2.0);
        let mut r = RunReport::new(&ExperimentConfig::default());
        r.rows = rows_from("norms", "run0", &k, 7);
        r
    }

    #[test]
    fn csv_has_fixed_columns() {
        let csv = report().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "suite,check,kind,value,bound,slack,status,seed");
        assert_eq!(lines.next().unwrap(), "norms,run0.x,asserted,0.5,1.0,0.5,pass,7");
        assert_eq!(lines.next().unwrap(), "norms,run0.y,reported,2.0,,,reported,7");
    }

    #[test]
    fn exit_code_follows_failures() {
        let mut r = report();
        assert_eq!(r.exit_code(), 0);
        r.rows[0].status = Status::Fail;
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.tally(), (0, 1, 1));
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let back = RunReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.rows, r.rows);
        assert_eq!(back.config_hash, r.config_hash);
    }
}
