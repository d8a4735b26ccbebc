//! JSON reports and CSV tables written by a run.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{ModtopError, Result};

/// A numeric trace written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: Vec<String>) -> Self {
        Self { name: name.to_string(), header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| ModtopError::Config(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_cell(*v))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| ModtopError::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn fmt_cell(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field that differs between reruns.
    pub timestamp: u64,
    pub passed: bool,
    pub result: Value,
    pub errors: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.to_string(),
            seed,
            timestamp,
            passed: false,
            result: Value::Null,
            errors: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with its timestamp zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        Report { timestamp: 0, ..self.clone() }.to_json()
    }

    /// Writes `report.json` plus one CSV per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| ModtopError::Config(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.json"), self.to_json() + "\n").map_err(io)?;
        for t in &self.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?).map_err(io)?;
        }
        Ok(())
    }
}

/// `serde_json::to_value`, which only fails for non-string map keys.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_encodes_infinity() {
        let mut t = Table::new("t", vec!["index".into(), "rho".into()]);
        t.rows.push(vec![1.0, f64::INFINITY]);
        t.rows.push(vec![2.0, 0.25]);
        assert_eq!(t.to_csv().unwrap(), "index,rho\n1e0,inf\n2e0,2.5e-1\n");
    }

    #[test]
    fn canonical_json_drops_timestamp() {
        let mut a = Report::new("modular", 3);
        let mut b = a.clone();
        a.timestamp = 1;
        b.timestamp = 2;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
