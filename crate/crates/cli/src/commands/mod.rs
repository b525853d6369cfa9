pub mod calibrate;
pub mod eval;
pub mod hull;
pub mod rasterize;
pub mod simulate;
pub mod train;

use std::path::{Path, PathBuf};

use crate::errors::{CliError, CliResult};

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Parse `x,y,z` into a sensor origin.
pub fn parse_origin(s: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "sensor origin must be x,y,z, got '{s}'"
        )));
    }
    let mut origin = [0.0; 3];
    for (slot, part) in origin.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad origin component '{part}'")))?;
    }
    Ok(origin)
}

/// Numerically sorted `(frame, path)` list of the `.txt` files in a
/// label directory. Frame ids come from the file stems.
pub fn list_label_files(dir: &Path) -> CliResult<Vec<(usize, PathBuf)>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Input(format!("cannot list {}: {e}", dir.display())))?
            .path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        let frame: usize = stem.parse().map_err(|_| {
            CliError::Input(format!(
                "label file {} has a non-numeric frame stem",
                path.display()
            ))
        })?;
        files.push((frame, path));
    }
    files.sort_by_key(|(frame, _)| *frame);
    Ok(files)
}

/// Parse a CSV of `x,y` rows (header and `#` comments allowed).
pub fn parse_xy_csv(text: &str, origin: &Path) -> CliResult<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
            continue;
        }
        let Some((xs, ys)) = line.split_once(',') else {
            return Err(CliError::Input(format!(
                "{}:{}: expected x,y",
                origin.display(),
                i + 1
            )));
        };
        let parse = |s: &str| -> CliResult<f64> {
            s.trim().parse().map_err(|_| {
                CliError::Input(format!(
                    "{}:{}: '{s}' is not numeric",
                    origin.display(),
                    i + 1
                ))
            })
        };
        rows.push((parse(xs)?, parse(ys)?));
    }
    Ok(rows)
}

/// Deterministic float formatting for CSV output (shortest round-trip).
pub fn fmt(v: f64) -> String {
    format!("{v:?}")
}
