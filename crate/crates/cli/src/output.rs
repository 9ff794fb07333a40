use std::path::Path;

use serde::Serialize;

use crate::CliError;

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Pretty JSON with keys sorted at every level, newline terminated.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    // serde_json's default map is ordered by key, so going through Value sorts.
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json(value)?).map_err(|e| io(path, e))
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Streams a writer-based table export into a file.
pub fn write_with(path: &Path, f: impl FnOnce(std::fs::File) -> berezin_core::Result<()>) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| io(path, e))?;
    f(file).map_err(|e| io(path, e))
}
