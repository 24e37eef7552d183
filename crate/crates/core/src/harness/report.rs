//! Tabular reports in CSV or JSON.
//!
//! Output is byte-stable: fixed column order, numbers with six decimals and a
//! '.' separator, '\n' line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidInput(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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
        v.map_or(Cell::Empty, Into::into)
    }
}

fn fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// The same table with every number rounded the way it is serialized.
    pub fn rounded(&self) -> Table {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(v) => Cell::Num(fixed6(*v).parse().unwrap_or(*v)),
                        other => other.clone(),
                    })
                    .collect()
            })
            .collect();
        Table {
            columns: self.columns.clone(),
            rows,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            let fields = row.iter().map(|c| match c {
                Cell::Num(v) => fixed6(*v),
                Cell::Text(s) => s.clone(),
                Cell::Bool(b) => b.to_string(),
                Cell::Empty => String::new(),
            });
            w.write_record(fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    fn to_json(&self) -> String {
        let quote = |s: &str| serde_json::to_string(s).expect("string serializes");
        let mut out = String::from("{\n  \"columns\": [");
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| quote(c))
                .collect::<Vec<_>>()
                .join(", "),
        );
        out.push_str("],\n  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) if v.is_finite() => fixed6(*v),
                    Cell::Num(_) | Cell::Empty => "null".to_string(),
                    Cell::Text(s) => quote(s),
                    Cell::Bool(b) => b.to_string(),
                })
                .collect();
            let sep = if i == 0 { "" } else { "," };
            let _ = write!(out, "{sep}\n    [{}]", cells.join(", "));
        }
        if !self.rows.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("]\n}\n");
        out
    }
}

/// Anything that can be written out as a report.
pub trait Report {
    fn to_table(&self) -> Table;
}

impl Report for Table {
    fn to_table(&self) -> Table {
        self.clone()
    }
}

pub fn emit_report<R: Report + ?Sized>(report: &R, path: &Path, format: Format) -> Result<()> {
    fs::write(path, report.to_table().render(format)).map_err(|e| Error::io(path, e))
}

/// Reads back a table written with [`Format::Json`].
pub fn load_table_json(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table_json(&text).map_err(|m| Error::parse(path, m))
}

fn parse_table_json(text: &str) -> std::result::Result<Table, String> {
    #[derive(Deserialize)]
    struct Raw {
        columns: Vec<String>,
        rows: Vec<Vec<serde_json::Value>>,
    }
    let raw: Raw = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut table = Table {
        columns: raw.columns,
        rows: Vec::new(),
    };
    for (i, row) in raw.rows.into_iter().enumerate() {
        if row.len() != table.columns.len() {
            return Err(format!("row {i} has {} cells", row.len()));
        }
        let cells = row
            .into_iter()
            .map(|v| match v {
                serde_json::Value::Null => Ok(Cell::Empty),
                serde_json::Value::Bool(b) => Ok(Cell::Bool(b)),
                serde_json::Value::Number(n) => n
                    .as_f64()
                    .map(Cell::Num)
                    .ok_or_else(|| format!("row {i}: bad number")),
                serde_json::Value::String(s) => Ok(Cell::Text(s)),
                other => Err(format!("row {i}: unexpected value {other}")),
            })
            .collect::<std::result::Result<_, _>>()?;
        table.rows.push(cells);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Table {
        let mut t = Table::new(&["level", "status", "value", "ok"]);
        t.push(vec![0.05.into(), "ok".into(), (1.0 / 3.0).into(), true.into()]);
        t.push(vec![10.0.into(), "a,b \"q\"".into(), Cell::Empty, false.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().render(Format::Csv);
        assert_eq!(
            csv,
            "level,status,value,ok\n0.050000,ok,0.333333,true\n10.000000,\"a,b \"\"q\"\"\",,false\n"
        );
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn negative_zero_prints_as_zero() {
        let mut t = Table::new(&["v"]);
        t.push(vec![(-1e-9).into()]);
        assert_eq!(t.render(Format::Csv), "v\n0.000000\n");
    }

    #[test]
    fn json_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        emit_report(&sample(), &path, Format::Json).unwrap();
        assert_eq!(load_table_json(&path).unwrap(), sample().rounded());
    }

    #[test]
    fn emission_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_report(&sample(), &a, Format::Csv).unwrap();
        emit_report(&sample(), &b, Format::Csv).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = emit_report(&sample(), Path::new("/nonexistent/dir/x.csv"), Format::Csv)
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }

    proptest! {
        #[test]
        fn json_parses_back_to_rounded(vals in proptest::collection::vec(-1e6f64..1e6, 0..8)) {
            let mut t = Table::new(&["x"]);
            for v in vals {
                t.push(vec![v.into()]);
            }
            prop_assert_eq!(parse_table_json(&t.render(Format::Json)).unwrap(), t.rounded());
        }
    }
}
