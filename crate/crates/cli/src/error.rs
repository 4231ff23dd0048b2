use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures surfaced by the binary, each mapped to a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error(transparent)]
    Core(#[from] ggm_core::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_CORRUPTION: u8 = 5;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use ggm_core::Error as E;
        match self {
            CliError::Invalid(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Csv { source, .. } => {
                if source.is_io_error() {
                    EXIT_IO
                } else {
                    EXIT_VALIDATION
                }
            }
            CliError::Json { source, .. } => {
                if source.is_io() {
                    EXIT_IO
                } else {
                    EXIT_VALIDATION
                }
            }
            CliError::Core(e) => match e {
                E::Domain(_)
                | E::Degenerate(_)
                | E::EmptyInput(_)
                | E::LengthMismatch { .. }
                | E::InsufficientOverlap(_) => EXIT_VALIDATION,
                E::Numeric { .. } | E::Underflow { .. } | E::Singularity(_) => EXIT_NUMERIC,
                E::Corruption(_) => EXIT_CORRUPTION,
                E::Io(_) => EXIT_IO,
            },
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}
