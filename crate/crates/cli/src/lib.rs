//! Library side of the `lorentzlab` command: spec loading, analyses and
//! report assembly. The binary only parses arguments and writes files.

pub mod commands;
pub mod spec;

use lorentzlab_core::GeomError;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use commands::{run, Analysis, Options};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid spec: {0}")]
    Schema(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

impl CliError {
    /// 2 for bad input, 3 for failures of the numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Schema(_) => 2,
            CliError::Geom(e) if e.is_numerical() => 3,
            CliError::Geom(_) => 2,
        }
    }
}

/// A finished analysis. `rejected` maps to exit code 1.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub rejected: bool,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn envelope(analysis: &str, input: &[u8], seed: u64, parameters: Value, results: Value) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": REPORT_SCHEMA_VERSION,
        "analysis": analysis,
        "input_digest": digest(input),
        "seed": seed,
        "parameters": parameters,
        "results": results,
    })
}

/// Pretty JSON with a trailing newline. Keys are sorted, so equal reports
/// serialize to equal bytes.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports are plain JSON");
    s.push('\n');
    s
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    use std::io::Write;
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
