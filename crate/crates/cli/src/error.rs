use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::Diagnostic;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// The request cannot run as given; nothing is emitted.
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Usage(Vec<Diagnostic>),

    #[error("unknown scenario `{0}` (see `gamowlab list`)")]
    UnknownScenario(String),

    #[error("i/o error at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv error at {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("manifest serialization failed: {0}")]
    Serialize(serde_json::Error),

    #[error("input file {path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Numerics(#[from] gamowlab_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::UnknownScenario(_) | CliError::Input { .. } => EXIT_USAGE,
            _ => EXIT_CHECK_FAILURE,
        }
    }
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}
