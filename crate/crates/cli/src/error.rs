use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] infband::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 0 success, 1 usage, 2 cap, 3 resource, 4 numeric/solver/IO, 5 convergence.
    pub fn exit_code(&self) -> i32 {
        use infband::Error as E;
        match self {
            CliError::Usage(_) | CliError::Read { .. } => 1,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::Domain(_) => 1,
                E::EnumerationTooLarge { .. } => 2,
                E::Resource(_) => 3,
                E::Solver(_) | E::Disconnected => 4,
                E::Convergence { .. } => 5,
            },
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
