use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("parameter: {0}")]
    Parameter(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: timebin_core::Error,
    },
    #[error("reconciliation failed verification: {0}")]
    Verification(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: line {line}: {reason}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn stage(stage: &'static str, source: timebin_core::Error) -> Self {
        AppError::Stage { stage, source }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        AppError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 1 parameter, 2 verification, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Parameter(_) | AppError::Stage { .. } => 1,
            AppError::Verification(_) => 2,
            AppError::Io { .. } | AppError::Csv { .. } | AppError::Format { .. } => 3,
        }
    }
}
