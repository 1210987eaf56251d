use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Numerical(#[from] tribody::Error),

    #[error("{0}")]
    Tolerance(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for invalid input, 3 for numerical or tolerance failures, 4 for
    /// I/O.
    pub fn exit_code(&self) -> i32 {
        use tribody::Error as E;
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(E::InvalidArgument(_) | E::InvalidPath(_) | E::Constraint(_) | E::Precondition(_)) => 2,
            Self::Numerical(_) | Self::Tolerance(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}
