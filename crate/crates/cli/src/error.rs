use std::io;
use std::path::Path;

use emc_core::snapshot::SnapshotError;
use emc_core::EmcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Integrity(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Integrity(_) => 4,
        }
    }

    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        CliError::Io {
            path: display(path.as_ref()),
            source,
        }
    }

    pub fn snapshot(path: impl AsRef<Path>, err: SnapshotError) -> Self {
        match err {
            SnapshotError::Io(e) => CliError::io(path, e),
            other => CliError::Integrity(format!("{}: {other}", display(path.as_ref()))),
        }
    }
}

impl From<EmcError> for CliError {
    fn from(e: EmcError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// `-` stands for stdin or stdout.
pub fn display(path: &Path) -> String {
    path.display().to_string()
}

pub type CliResult<T> = Result<T, CliError>;
