//! Atomic artifact writers. Each file is written to a temporary sibling and
//! renamed into place, so readers never observe a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::{CliError, CliResult};

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config {
        message: format!("cannot write {}: {e}", path.display()),
        key: Some("out".into()),
    }
}

/// Writes `bytes` to `dir/name` atomically, creating `dir` if needed.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(&target, e))?;
    tmp.flush().map_err(|e| io_error(&target, e))?;
    tmp.persist(&target).map_err(|e| io_error(&target, e.error))?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(&dir.join(name), e))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// CSV with a header row. Floats use shortest round-trip formatting, so the
/// bytes depend only on the values.
pub fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<f64>]) -> CliResult<PathBuf> {
    let target = dir.join(name);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| io_error(&target, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| io_error(&target, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_error(&target, e))?;
    write_atomic(dir, name, &bytes)
}
