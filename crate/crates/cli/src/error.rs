use std::path::{Path, PathBuf};

use moralens_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("missing stage input {path} (run `{stage}` first)")]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error("stale input {path}: {reason}; re-run `{stage}`")]
    StaleInput {
        path: PathBuf,
        stage: &'static str,
        reason: String,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// 3 for numeric non-convergence, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::NotConverged { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
