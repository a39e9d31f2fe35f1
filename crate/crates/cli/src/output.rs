use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

/// A failure, split by who has to fix it.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input. Exit code 2.
    Input(String),
    /// Valid input on which a computation failed. Exit code 3.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    pub fn to_json_line(&self) -> String {
        let (kind, message) = match self {
            CliError::Input(m) => ("input", m),
            CliError::Compute(m) => ("computation", m),
        };
        json!({ "level": "error", "kind": kind, "exit_code": self.exit_code(), "message": message })
            .to_string()
    }
}

pub fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn compute_err(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

pub fn warn(message: &str) {
    eprintln!("{}", json!({ "level": "warning", "message": message }));
}

/// Wraps a result with the tool version and the exact configuration.
pub fn bundle(config: Value, result: impl Serialize) -> Result<String, CliError> {
    let doc = json!({
        "tool": { "name": "blurfitts", "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "result": serde_json::to_value(result).map_err(compute_err)?,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(compute_err)?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `path` (stdout when `None`). Files are written to a
/// sibling temporary and renamed, so a failed run never leaves a truncated
/// output behind.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(input_err)
        }
        Some(path) => {
            let mut tmp = PathBuf::from(path);
            let name = path
                .file_name()
                .ok_or_else(|| CliError::Input(format!("not a file path: {}", path.display())))?;
            tmp.set_file_name(format!(".{}.partial", name.to_string_lossy()));
            fs::write(&tmp, text)
                .and_then(|_| fs::rename(&tmp, path))
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Parses a JSON file that is either a bundle written by this tool or the
/// bare result it wraps.
pub fn read_result(path: &Path) -> Result<Value, CliError> {
    let text = read_text(path)?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if value.get("tool").is_some() {
        if let Some(inner) = value.get_mut("result") {
            return Ok(inner.take());
        }
    }
    Ok(value)
}

pub fn parse_result<T: serde::de::DeserializeOwned>(
    path: &Path,
    what: &str,
) -> Result<T, CliError> {
    serde_json::from_value(read_result(path)?)
        .map_err(|e| CliError::Input(format!("{} is not a valid {what}: {e}", path.display())))
}
