use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PNM data: {0}")]
    Parse(String),

    #[error("truncated PNM payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("{0}")]
    Bounds(String),

    #[error("{0}")]
    Shape(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{0}")]
    Domain(String),

    #[error("{0}")]
    Contract(String),

    #[error("unmatched files: {}", .0.join(", "))]
    Pairing(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// An error raised while processing a named file of a dataset.
    #[error("{name}: {source}")]
    File { name: String, source: Box<Error> },
}

impl Error {
    /// Stable, machine-parsable class name of the error.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse(_) => "ParseError",
            Error::Truncated { .. } => "TruncatedError",
            Error::Bounds(_) => "BoundsError",
            Error::Shape(_) => "ShapeError",
            Error::EmptyInput(_) => "EmptyInputError",
            Error::Domain(_) => "DomainError",
            Error::Contract(_) => "ContractError",
            Error::Pairing(_) => "PairingError",
            Error::Io { .. } => "IoError",
            Error::File { source, .. } => source.class(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(self, name: &str) -> Self {
        Error::File {
            name: name.to_string(),
            source: Box::new(self),
        }
    }
}
