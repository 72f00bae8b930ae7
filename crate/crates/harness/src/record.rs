use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const TOOLKIT: &str = "qvar";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One table entry. Non-finite floats are stored as `Missing`, so JSON output
/// never contains `NaN`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn float(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Float(x)
        } else {
            Cell::Missing
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_float(*x),
            Cell::Text(s) => csv_text(s),
            Cell::Missing => String::new(),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Outcome of one named assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest residual or measured statistic, when one applies.
    pub value: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, value: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            value: value.filter(|v| v.is_finite()),
            detail: detail.into(),
        }
    }
}

/// Everything a scan produced, with the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Not serialized, so reruns produce identical bytes.
    #[serde(skip)]
    pub wall_clock: Option<Duration>,
}

impl RunRecord {
    pub fn new(command: &str, config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            toolkit: TOOLKIT.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: BTreeMap::new(),
            checks: Vec::new(),
            notes: config.range_notes(),
            wall_clock: None,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn fit(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.fits.insert(name.to_string(), value);
        } else {
            self.notes.push(format!("fit {name} is not finite"));
        }
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Comment lines carrying the config, fits and checks, then the table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {}", self.toolkit, self.version, self.command);
        let cfg = serde_json::to_string(&self.config).expect("config always serializes");
        let _ = writeln!(out, "# config {cfg}");
        for (k, v) in &self.fits {
            let _ = writeln!(out, "# fit {k} = {}", fmt_float(*v));
        }
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            let value = c
                .value
                .map(|v| format!(" value={}", fmt_float(v)))
                .unwrap_or_default();
            let _ = writeln!(out, "# check {} {status}{value} {}", c.name, c.detail);
        }
        for n in &self.notes {
            let _ = writeln!(out, "# note {n}");
        }
        let header: Vec<String> = self.columns.iter().map(|c| csv_text(c)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
