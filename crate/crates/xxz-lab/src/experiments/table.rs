//! Tabular experiment output with a stable CSV schema and a JSON mirror
//! carrying the metadata header.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One table cell. Floats are printed with Rust's shortest round-trip
/// formatting, which is stable across runs and platforms.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v}"),
            Cell::Str(v) => {
                debug_assert!(!v.contains(',') && !v.contains('\n'));
                v.clone()
            }
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::json!(v),
            Cell::Float(v) => serde_json::json!(v),
            Cell::Str(v) => serde_json::json!(v),
            Cell::Bool(v) => serde_json::json!(v),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Result table of one experiment run: fixed columns, ordered rows, a
/// metadata map (config echo, seed, code version, notes), and a count of
/// bound violations that drives the process exit code.
#[derive(Clone, Debug)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    metadata: serde_json::Map<String, serde_json::Value>,
    violations: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: serde_json::Map::new(),
            violations: 0,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: serde_json::Value) {
        self.metadata.insert(key.to_string(), value);
    }

    pub fn add_violations(&mut self, n: usize) {
        self.violations += n;
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn metadata(&self) -> &serde_json::Map<String, serde_json::Value> {
        &self.metadata
    }

    /// CSV: `#` metadata lines (sorted keys), header, then rows.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "# violations: {}", self.violations)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// JSON mirror of the CSV with the metadata as a header object.
    pub fn write_json<W: Write>(&self, w: &mut W) -> Result<()> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect())
            .collect();
        let doc = serde_json::json!({
            "metadata": self.metadata,
            "violations": self.violations,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn emit(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let file = std::fs::File::create(path).map_err(Error::Io)?;
        let mut buf = std::io::BufWriter::new(file);
        match format {
            OutputFormat::Csv => self.write_csv(&mut buf)?,
            OutputFormat::Json => self.write_json(&mut buf)?,
        }
        buf.flush()?;
        Ok(())
    }

    pub fn to_string_in(&self, format: OutputFormat) -> Result<String> {
        let mut buf = Vec::new();
        match format {
            OutputFormat::Csv => self.write_csv(&mut buf)?,
            OutputFormat::Json => self.write_json(&mut buf)?,
        }
        Ok(String::from_utf8(buf).expect("tables are utf8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "mean", "label", "ok"]);
        t.set_meta("master_seed", serde_json::json!(7));
        t.push_row(vec![1usize.into(), 0.5.into(), "a".into(), true.into()]);
        t.push_row(vec![2usize.into(), 0.125.into(), "b".into(), false.into()]);
        t
    }

    #[test]
    fn csv_layout_is_stable() {
        let t = sample();
        let s = t.to_string_in(OutputFormat::Csv).unwrap();
        assert_eq!(
            s,
            "# master_seed: 7\n# violations: 0\nx,mean,label,ok\n1,0.5,a,true\n2,0.125,b,false\n"
        );
    }

    #[test]
    fn json_mirrors_csv() {
        let t = sample();
        let s = t.to_string_in(OutputFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["metadata"]["master_seed"], 7);
        assert_eq!(v["columns"][1], "mean");
        assert_eq!(v["rows"][0][1], 0.5);
        assert_eq!(v["rows"][1][3], false);
    }

    #[test]
    fn emitting_twice_is_byte_identical() {
        let t = sample();
        let a = t.to_string_in(OutputFormat::Csv).unwrap();
        let b = t.to_string_in(OutputFormat::Csv).unwrap();
        assert_eq!(a, b);
    }
}
