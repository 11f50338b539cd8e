//! Config loading, config echo and output placement shared by all subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Read a JSON config file, or fall back to defaults when none is given.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

/// Parse an argument that is either inline JSON or a path to a JSON file.
pub fn json_arg<T: DeserializeOwned>(name: &str, value: &str) -> CliResult<T> {
    let trimmed = value.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        value.to_string()
    } else {
        fs::read_to_string(value).map_err(|e| CliError::usage(format!("--{name}: cannot read {value}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("--{name}: {e}")))
}

/// Output directory: the explicit `--out-dir`, else the directory of `out`, else the working directory.
pub fn resolve_out_dir(out_dir: Option<&Path>, out: Option<&Path>) -> PathBuf {
    match (out_dir, out) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(file)) => match file.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        },
        (None, None) => PathBuf::from("."),
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

/// Write the effective configuration of `command` into `dir` so the run can be repeated.
pub fn echo_config<T: Serialize>(dir: &Path, command: &str, config: &T) -> CliResult<PathBuf> {
    let path = dir.join(format!("{command}.config.json"));
    let mut text = serde_json::to_string_pretty(config).map_err(|e| CliError::runtime(e.to_string()))?;
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}
