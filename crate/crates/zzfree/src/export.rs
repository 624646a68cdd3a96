//! Tabular results as CSV or JSON.
//!
//! Floats are written with 12 significant digits. CSV files carry the
//! metadata as leading `# key: value` lines.

use crate::error::{Error, Result};
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Written as `NA`.
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParameter { name: "format", reason: format!("unknown format `{s}`") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub command: String,
    pub device: String,
    pub levels: usize,
    /// Extra `key: value` metadata, kept in insertion order.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepResult {
    pub fn new(command: &str, device: &str, levels: usize, columns: &[&str]) -> Self {
        SweepResult {
            command: command.into(),
            device: device.into(),
            levels,
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), got: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("tool".to_string(), format!("zzfree {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), self.command.clone()),
            ("device".to_string(), self.device.clone()),
            ("levels".to_string(), self.levels.to_string()),
        ];
        h.extend(self.meta.iter().cloned());
        h
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in self.header() {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| Error::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text)).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let meta: Map<String, Value> = self.header().into_iter().map(|(k, v)| (k, Value::String(v))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().map(cell_json)).collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "metadata": meta, "columns": self.columns, "rows": rows });
        serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Render `sweep` and write it to `path`, or stdout when `path` is `None`.
pub fn export_results(sweep: &SweepResult, format: Format, path: Option<&Path>) -> Result<()> {
    let text = sweep.render(format)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.11e}", x);
    let (mant, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-3..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let v: f64 = s.parse().unwrap();
        trim(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim(mant.to_string()), exp)
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_sig(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Missing => "NA".into(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) if x.is_finite() => {
            let v: f64 = format_sig(*x).parse().unwrap();
            serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
        }
        Cell::Num(_) | Cell::Missing => Value::Null,
        Cell::Int(i) => json!(i),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(6.577), "6.577");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(-2.0e-9), "-2e-9");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn csv_layout() {
        let mut s = SweepResult::new("idle-points", "device2", 3, &["kind", "wc"]);
        s.push(vec!["genuine".into(), 6.577.into()]).unwrap();
        s.push(vec!["affine".into(), Cell::Missing]).unwrap();
        let text = s.to_csv().unwrap();
        assert!(text.starts_with("# tool: zzfree"));
        assert!(text.contains("kind,wc\ngenuine,6.577\naffine,NA\n"));
        assert!(s.push(vec![Cell::Missing]).is_err());
    }

    #[test]
    fn json_layout() {
        let mut s = SweepResult::new("freedom", "device6", 3, &["wc", "omega"]);
        s.push(vec![5.2.into(), Cell::Missing]).unwrap();
        let v: Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(v["metadata"]["device"], "device6");
        assert_eq!(v["rows"][0]["wc"], 5.2);
        assert!(v["rows"][0]["omega"].is_null());
    }
}
