//! Deterministic text serialization for run artifacts.
//!
//! Every artifact the tools emit is either CSV or JSON, and reruns with the
//! same inputs must produce byte-identical files. Two rules give that:
//! floats are always printed with [`float_cell`] (17 significant digits, so
//! the value round-trips exactly), and JSON objects go through
//! `serde_json::Value`, whose map keeps keys in sorted order.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::Result;

/// Canonical float rendering: scientific notation with 16 fractional
/// digits, enough for an exact `f64` round trip. NaN and infinities render
/// as `NaN`, `inf`, `-inf`.
pub fn float_cell(x: f64) -> String {
    format!("{x:.16e}")
}

/// Simple CSV table with a fixed header. Cells are rendered by the caller
/// ([`float_cell`] for numbers); commas and newlines inside cells are a
/// caller bug and panic in debug builds.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len(), "row width mismatch");
        debug_assert!(
            cells.iter().all(|c| !c.contains(',') && !c.contains('\n')),
            "cell contains a CSV delimiter"
        );
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Serializes through `serde_json::Value` so that object keys come out
/// sorted regardless of struct field order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(value)?)
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = to_sorted_json(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(json_string(value)?.as_bytes())?;
    Ok(())
}
