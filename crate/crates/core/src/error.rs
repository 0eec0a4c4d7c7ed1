use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can surface.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: points per dimension must be even and at least 8")]
    InvalidGrid(usize),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("fields live on different grids ({0} vs {1} points per dimension)")]
    GridMismatch(usize, usize),

    #[error("poisson source has nonzero mean {0:e}; no periodic solution exists")]
    NonZeroMean(f64),

    #[error("field is not divergence-free (sup |div| = {0:e})")]
    NotDivergenceFree(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative integrand {0:e}: norms cannot be negative")]
    NegativeIntegrand(f64),

    #[error("empty history")]
    EmptyHistory,

    #[error("no diagnostics records to write")]
    EmptyRecords,

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad checkpoint magic {0:?}, expected \"IVBK1\"")]
    BadMagic(Vec<u8>),

    #[error("checkpoint format version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },

    #[error("truncated checkpoint: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("malformed diagnostics file: {0}")]
    MalformedCsv(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
