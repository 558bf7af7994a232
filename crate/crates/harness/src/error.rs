use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(#[from] nsm_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("{failed} of {total} sweep runs failed")]
    PartialSweep { failed: usize, total: usize },

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::PartialSweep { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
