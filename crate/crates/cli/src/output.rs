//! Rendering of tabular results as CSV, JSON or aligned text.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Fixed-precision float for CSV and tables.
pub fn fixed(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.9}")
    }
}

pub fn fixed_opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

pub fn int_opt(v: Option<u64>) -> String {
    v.map(|k| k.to_string()).unwrap_or_default()
}

/// A result set: string cells for CSV/table, plus a JSON mirror.
/// Tables right-align every column but the last.
pub struct Report {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// Extra lines shown under the table only.
    pub notes: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> io::Result<String> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                Ok(s)
            }
            Format::Table => Ok(self.table()),
        }
    }

    fn table(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let last = cells.len() - 1;
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (c, w))| if k == last { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&line(self.headers.clone()));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str(note);
            out.push('\n');
        }
        out
    }
}

pub fn emit(text: &str, output: Option<&Path>) -> io::Result<()> {
    match output {
        Some(path) => File::create(path)?.write_all(text.as_bytes()),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
