use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Data(#[from] increparse::Error),
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    /// The reader went away, as in `increparse ... | head`.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Data(increparse::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::File { .. } | CliError::Malformed(_) => 2,
            CliError::Data(increparse::Error::Trace(
                increparse::error::TraceError::HorizonBreach { .. },
            )) => 3,
            CliError::Data(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

macro_rules! data_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.into())
            }
        }
    )*};
}

data_from!(
    increparse::error::ConlluError,
    increparse::error::LabelError,
    increparse::error::ModelError,
    increparse::error::EvalError,
    increparse::error::TraceError,
    increparse::error::TransitionError,
    std::io::Error
);
