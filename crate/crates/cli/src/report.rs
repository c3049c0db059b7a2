//! Verification reports: rows sorted by check id, JSON and CSV writers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub check_id: String,
    /// The identity or inequality the row tests.
    pub anchor: String,
    /// `None` when the check could not be evaluated.
    pub max_error: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckRow {
    /// Passes iff `max_error ≤ threshold`.
    pub fn measured(
        check_id: impl Into<String>,
        anchor: &str,
        max_error: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            check_id: check_id.into(),
            anchor: anchor.to_string(),
            pass: max_error <= threshold,
            max_error: Some(max_error),
            threshold,
            detail: detail.into(),
        }
    }

    /// A module error, surfaced as a failing row.
    pub fn failed(
        check_id: impl Into<String>,
        anchor: &str,
        threshold: f64,
        err: impl std::fmt::Display,
    ) -> Self {
        Self {
            check_id: check_id.into(),
            anchor: anchor.to_string(),
            max_error: None,
            threshold,
            pass: false,
            detail: format!("error: {err}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Everything needed to rerun the command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub grid: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub stamp: Stamp,
    pub summary: Summary,
    pub pass: bool,
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    pub fn new(stamp: Stamp, mut rows: Vec<CheckRow>) -> Self {
        rows.sort_by(|a, b| a.check_id.cmp(&b.check_id));
        let passed = rows.iter().filter(|r| r.pass).count();
        let summary = Summary {
            total: rows.len(),
            passed,
            failed: rows.len() - passed,
        };
        Self {
            stamp,
            pass: summary.failed == 0,
            summary,
            rows,
        }
    }

    /// Writes `<command>_report.json` and `<command>_report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        let json = dir.join(format!("{}_report.json", self.stamp.command));
        let csv = dir.join(format!("{}_report.csv", self.stamp.command));
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        crate::write_file(&json, text.as_bytes())?;
        crate::write_file(&csv, &self.csv_bytes())?;
        Ok((json, csv))
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory CSV");
        }
        w.into_inner().expect("in-memory CSV")
    }

    pub fn print_summary(&self) {
        for r in self.rows.iter().filter(|r| !r.pass) {
            let err = r
                .max_error
                .map_or("n/a".to_string(), |e| format!("{e:.3e}"));
            eprintln!(
                "FAIL {}: {} (max error {err}, threshold {:e})",
                r.check_id, r.detail, r.threshold
            );
        }
        println!(
            "{}: {} checks, {} passed, {} failed",
            self.stamp.command, self.summary.total, self.summary.passed, self.summary.failed
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stamp() -> Stamp {
        Stamp {
            tool: "psclab",
            version: "0",
            command: "verify".into(),
            seed: 1,
            tolerances: BTreeMap::new(),
            grid: BTreeMap::new(),
        }
    }

    #[test]
    fn rows_sort_and_summarize() {
        let rows = vec![
            CheckRow::measured("b", "x", 1e-3, 1e-4, ""),
            CheckRow::measured("a", "x", 1e-5, 1e-4, ""),
            CheckRow::failed("c", "x", 1e-4, "boom"),
        ];
        let r = VerificationReport::new(stamp(), rows);
        assert_eq!(
            r.rows
                .iter()
                .map(|r| r.check_id.as_str())
                .collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
        assert_eq!(
            r.summary,
            Summary {
                total: 3,
                passed: 1,
                failed: 2
            }
        );
        assert!(!r.pass);
        assert_eq!(r.rows[2].max_error, None);
    }

    #[test]
    fn nan_error_fails() {
        assert!(!CheckRow::measured("a", "x", f64::NAN, 1.0, "").pass);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = VerificationReport::new(
            stamp(),
            vec![CheckRow::measured("a", "x = y", 0.0, 1.0, "ok")],
        );
        let text = String::from_utf8(r.csv_bytes()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("check_id,anchor,max_error,threshold,pass,detail")
        );
        assert_eq!(lines.next(), Some("a,x = y,0.0,1.0,true,ok"));
    }
}
