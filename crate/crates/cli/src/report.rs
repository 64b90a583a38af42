use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;
use crate::GlobalArgs;

/// Every report carries the resolved configuration. The timestamp sits in its
/// own field so the rest of the document is reproducible byte for byte.
#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    global: &'a GlobalArgs,
    config: &'a C,
    result: &'a R,
    timestamp_unix: u64,
}

/// Writes `<command>_report.json` into the output directory and echoes it on
/// stdout.
pub fn emit<C: Serialize, R: Serialize>(
    g: &GlobalArgs,
    command: &str,
    config: &C,
    result: &R,
) -> Result<PathBuf, CliError> {
    let timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = Report {
        command,
        global: g,
        config,
        result,
        timestamp_unix,
    };
    let text = serde_json::to_string_pretty(&report)?;
    let path = artifact(g, &format!("{}_report.json", command.replace('-', "_")));
    std::fs::write(&path, format!("{text}\n"))?;
    println!("{text}");
    Ok(path)
}

pub fn artifact(g: &GlobalArgs, name: &str) -> PathBuf {
    g.output_dir.join(name)
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// A missing input is a bad flag, so it maps to a validation error.
pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        match e.kind() {
            std::io::ErrorKind::NotFound => CliError::Validation(msg),
            _ => CliError::Runtime(msg),
        }
    })
}
