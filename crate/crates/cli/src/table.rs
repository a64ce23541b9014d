use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use fockwit::witnesses::WitnessReport;
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Scientific notation with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or_else(|| Value::String(x.to_string()), Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows with named columns, written as CSV or as a JSON array of objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub const REPORT_COLUMNS: [&str; 8] = ["condition", "m", "n", "xi", "lhs", "rhs", "margin", "verdict"];

pub fn report_cells(r: &WitnessReport) -> Vec<Cell> {
    vec![
        r.condition.as_str().into(),
        r.m.into(),
        r.n.into(),
        r.xi.into(),
        r.lhs.into(),
        r.rhs.into(),
        r.margin.into(),
        r.verdict.as_str().into(),
    ]
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn reports(reports: &[WitnessReport]) -> Self {
        let mut t = Self::new(REPORT_COLUMNS);
        t.rows.extend(reports.iter().map(report_cells));
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("json values serialize") + "\n",
        }
    }
}

/// Where a command's output goes: an explicit file, a file in the default directory, or stdout.
#[derive(Debug, Clone, PartialEq)]
pub enum Sink {
    File(PathBuf),
    Stdout,
}

impl Sink {
    pub fn resolve(explicit: Option<&Path>, out_dir: Option<&Path>, default_name: &str) -> Self {
        match (explicit, out_dir) {
            (Some(p), _) => Sink::File(p.to_path_buf()),
            (None, Some(dir)) => Sink::File(dir.join(default_name)),
            (None, None) => Sink::Stdout,
        }
    }

    pub fn write(&self, text: &str) -> anyhow::Result<()> {
        match self {
            Sink::File(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
                }
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_twelve_significant_digits() {
        assert_eq!(fmt_float(9.0), "9.00000000000e0");
        assert_eq!(fmt_float(-1.0 / 3.0), "-3.33333333333e-1");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
    }

    #[test]
    fn csv_and_json_agree_on_shape() {
        let mut t = Table::new(["x", "label", "ok", "maybe"]);
        t.push(vec![1.5.into(), "a,b".into(), true.into(), Cell::Empty]);
        assert_eq!(t.to_csv(), "x,label,ok,maybe\n1.50000000000e0,\"a,b\",true,\n");
        let j = t.to_json();
        assert_eq!(j[0]["x"], 1.5);
        assert_eq!(j[0]["maybe"], Value::Null);
    }
}
