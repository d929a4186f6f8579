//! Byte-stable CSV and JSON emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest decimal string that round-trips to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(&dir.to_path_buf(), e))
}

pub fn json_string<T: Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> CliResult<()> {
    fs::write(path, json_string(value)?).map_err(|e| CliError::io(path, e))
}

/// CSV with a fixed header row and pre-formatted fields.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Runtime(e.to_string());
    writer.write_record(header).map_err(fail)?;
    for row in rows {
        writer.write_record(row).map_err(fail)?;
    }
    writer.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn write_csv(path: &PathBuf, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    fs::write(path, csv_bytes(header, rows)?).map_err(|e| CliError::io(path, e))
}

pub fn print_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let bytes = csv_bytes(header, rows)?;
    std::io::stdout()
        .write_all(&bytes)
        .map_err(|e| CliError::Runtime(e.to_string()))
}
