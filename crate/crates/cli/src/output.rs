//! CSV tables and the JSON metadata sidecar.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Rows of preformatted cells under a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Necessary).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same value, in exponent
/// form outside `[1e-3, 1e6)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-3..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `s_1 .. s_N` population columns.
pub fn site_columns(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|i| format!("s_{i}"))
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    /// Quantities derived from the config, such as the Rabi frequency.
    pub derived: Value,
    pub summary: Value,
    pub columns: &'a [String],
    pub rows: usize,
    pub workers: usize,
    pub n_cap: usize,
    /// Seconds since the Unix epoch when the run started.
    pub started_at: f64,
    pub wall_time_s: f64,
}

/// `results.csv` → `results.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn write_outputs(csv_path: &Path, table: &Table, meta: &Metadata<'_>) -> Result<PathBuf> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    }
    let file = File::create(csv_path).map_err(|source| CliError::Write { path: csv_path.to_path_buf(), source })?;
    table.write_csv(file)?;
    let side = sidecar_path(csv_path);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(&side, text).map_err(|source| CliError::Write { path: side.clone(), source })?;
    Ok(side)
}
