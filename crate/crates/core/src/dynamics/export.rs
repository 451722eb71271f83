//! CSV and JSON output.
//!
//! Numbers are written with 17 significant digits so that a CSV re-parses to
//! the exact same `f64` values.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column-oriented numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self {
            header: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) -> &mut Self {
        self.header.push(label.into());
        self.columns.push(values);
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == label)
            .map(|k| self.columns[k].as_slice())
    }

    /// `time_s` followed by every trajectory series.
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let mut t = Self::new();
        t.push("time_s", traj.times.clone());
        for s in &traj.series {
            t.push(s.label.clone(), s.values.clone());
        }
        t
    }

    fn check(&self) -> Result<()> {
        let n = self.rows();
        if let Some(k) = self.columns.iter().position(|c| c.len() != n) {
            return Err(Error::Internal(format!(
                "column `{}` has {} rows, expected {n}",
                self.header[k],
                self.columns[k].len()
            )));
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        self.check()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| format_number(c[r])))
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Internal(format!("{}: {e}", path.display())))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| Error::Internal(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for record in r.records() {
            let record = record.map_err(|e| Error::Internal(e.to_string()))?;
            for (k, field) in record.iter().enumerate() {
                let v = field
                    .parse::<f64>()
                    .map_err(|e| Error::Internal(format!("{}: `{field}`: {e}", path.display())))?;
                columns[k].push(v);
            }
        }
        Ok(Self { header, columns })
    }
}

impl Default for Table {
    fn default() -> Self {
        Self::new()
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let values = vec![0.0, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.1 + 0.2];
        let mut t = Table::new();
        t.push("time_s", (0..values.len()).map(|k| k as f64 * 1e-7).collect());
        t.push("x", values.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        t.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("x").unwrap(), values.as_slice());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_number(1.0), "1.0000000000000000e0");
        assert_eq!(format_number(0.1).len(), "1.0000000000000001e-1".len());
        let mut t = Table::new();
        t.push("a", vec![1.0]).push("b", vec![2.0, 3.0]);
        assert!(t.to_csv_string().is_err());
    }
}
