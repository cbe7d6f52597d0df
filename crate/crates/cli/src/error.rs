use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: heisenberg::Error,
    },

    #[error(transparent)]
    Analysis(#[from] heisenberg::Error),

    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),

    #[error("encoding report: {0}")]
    Json(#[from] serde_json::Error),

    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// The reader of standard output went away (e.g. `| head`).
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            Self::Output(e) => Some(e),
            Self::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Io { .. } | Self::Output(_) => EXIT_IO,
            Self::Csv(e) if e.is_io_error() => EXIT_IO,
            _ => EXIT_ERROR,
        }
    }
}
