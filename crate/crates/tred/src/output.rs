//! CSV and manifest writers.
//!
//! CSV cells hold floats in their shortest round-trip decimal form, so a
//! rerun with identical inputs reproduces every file byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::RunError;

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes one CSV file with a header row; rows are already formatted.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    let mut out = String::with_capacity(rows.len() * header.len() * 12);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| io_err(path, e))?;
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// Run record written next to the CSVs. Timing lives here rather than in
/// any CSV so data files stay reproducible.
#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub experiment: String,
    pub tool_version: String,
    pub config: C,
    pub outputs: Vec<String>,
    /// Numerical breakdowns encountered and kept as partial results.
    pub breakdowns: Vec<String>,
    /// Non-fatal diagnostics.
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
    pub threads: usize,
}

pub fn write_manifest<C: Serialize>(
    dir: &Path,
    manifest: &Manifest<C>,
) -> Result<PathBuf, RunError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join("run_manifest.json");
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| RunError::Io(format!("manifest serialization: {e}")))?;
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
