//! Checks, reports and their JSON and CSV forms.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|observed − expected| ≤ tolerance·|expected|`.
    Relative,
    /// `|observed − expected| ≤ tolerance`.
    Absolute,
    /// `|observed| < tolerance`.
    Below,
    /// `observed ≥ tolerance`.
    AtLeast,
    /// A yes/no property; `observed` is 1 or 0.
    Holds,
    /// The computation itself failed.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The result under test, so a failure points back to it.
    pub anchor: &'static str,
    pub comparison: Comparison,
    pub expected: Option<f64>,
    pub observed: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl Check {
    fn base(name: impl Into<String>, anchor: &'static str, comparison: Comparison) -> Self {
        Self {
            name: name.into(),
            anchor,
            comparison,
            expected: None,
            observed: None,
            tolerance: None,
            pass: false,
            note: None,
            wall_seconds: None,
        }
    }

    pub fn relative(name: impl Into<String>, anchor: &'static str, expected: f64, observed: f64, tol: f64) -> Self {
        Self {
            expected: Some(expected),
            observed: Some(observed),
            tolerance: Some(tol),
            pass: (observed - expected).abs() <= tol * expected.abs(),
            ..Self::base(name, anchor, Comparison::Relative)
        }
    }

    pub fn absolute(name: impl Into<String>, anchor: &'static str, expected: f64, observed: f64, tol: f64) -> Self {
        Self {
            expected: Some(expected),
            observed: Some(observed),
            tolerance: Some(tol),
            pass: (observed - expected).abs() <= tol,
            ..Self::base(name, anchor, Comparison::Absolute)
        }
    }

    pub fn below(name: impl Into<String>, anchor: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            observed: Some(observed),
            tolerance: Some(bound),
            pass: observed.abs() < bound,
            ..Self::base(name, anchor, Comparison::Below)
        }
    }

    pub fn at_least(name: impl Into<String>, anchor: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            observed: Some(observed),
            tolerance: Some(bound),
            pass: observed >= bound,
            ..Self::base(name, anchor, Comparison::AtLeast)
        }
    }

    pub fn holds(name: impl Into<String>, anchor: &'static str, ok: bool) -> Self {
        Self {
            expected: Some(1.0),
            observed: Some(if ok { 1.0 } else { 0.0 }),
            pass: ok,
            ..Self::base(name, anchor, Comparison::Holds)
        }
    }

    pub fn error(name: impl Into<String>, anchor: &'static str, err: impl std::fmt::Display) -> Self {
        Self { note: Some(err.to_string()), ..Self::base(name, anchor, Comparison::Error) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Rows under fixed column names.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(Cell::Num).collect());
    }

    /// Writes the table with every float at 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> csv::Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// `{:.16e}`, i.e. 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub command: String,
    pub seed: u64,
    /// True exactly when every check passes.
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Command-specific results, written at the top level of the JSON.
    #[serde(flatten)]
    pub data: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>, seed: u64, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { command: command.into(), seed, pass, checks, data: Map::new(), table: None, wall_seconds: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only plain data")
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Timings kept only when asked for, so that default reports are
/// byte-identical across runs.
pub fn maybe_seconds(keep: bool, d: Duration) -> Option<f64> {
    keep.then_some(d.as_secs_f64())
}
