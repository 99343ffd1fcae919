//! CSV tables with `name[unit]` headers, and JSON side files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numbers(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Self::Numbers(v) => v.len(),
            Self::Text(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    names: Vec<String>,
    units: Vec<String>,
    columns: Vec<Column>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> &mut Self {
        self.push_column(name.into(), unit.into(), Column::Numbers(values))
    }

    pub fn push_text(&mut self, name: impl Into<String>, values: Vec<String>) -> &mut Self {
        self.push_column(name.into(), "text".into(), Column::Text(values))
    }

    fn push_column(&mut self, name: String, unit: String, col: Column) -> &mut Self {
        if let Some(first) = self.columns.first() {
            assert_eq!(first.len(), col.len(), "column `{name}` has the wrong length");
        }
        self.names.push(name);
        self.units.push(unit);
        self.columns.push(col);
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Column::len)
    }

    pub fn header(&self) -> Vec<String> {
        self.names.iter().zip(&self.units).map(|(n, u)| format!("{n}[{u}]")).collect()
    }

    /// Numeric column by name.
    pub fn numbers(&self, name: &str) -> Option<&[f64]> {
        let i = self.names.iter().position(|n| n == name)?;
        match &self.columns[i] {
            Column::Numbers(v) => Some(v),
            Column::Text(_) => None,
        }
    }

    pub fn text(&self, name: &str) -> Option<&[String]> {
        let i = self.names.iter().position(|n| n == name)?;
        match &self.columns[i] {
            Column::Text(v) => Some(v),
            Column::Numbers(_) => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in 0..self.rows() {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|c| match c {
                    Column::Numbers(v) => format_number(v[r]),
                    Column::Text(v) => quote(&v[r]),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let plain = format!("{v}");
    if plain.len() > 24 {
        format!("{v:e}")
    } else {
        plain
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_csv(dir: &Path, stem: &str, table: &Table) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.csv"));
    write_atomic(&path, &table.to_csv())?;
    Ok(path)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    write_atomic(path, &text)
}

/// Reads a two-column signal file (`t[us]`, `p_e[1]`).
pub fn read_signal(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let bad = |message: String| CliError::Signal { path: path.to_path_buf(), message };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> =
        lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').map(|s| s.trim().to_string()).collect();
    let ti = header.iter().position(|h| h == "t[us]").ok_or_else(|| bad("no `t[us]` column".into()))?;
    let pi = header.iter().position(|h| h == "p_e[1]").ok_or_else(|| bad("no `p_e[1]` column".into()))?;
    let (mut t, mut p) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            cells.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(format!("row {} is malformed", k + 2)))
        };
        t.push(get(ti)?);
        p.push(get(pi)?);
    }
    Ok((t, p))
}
