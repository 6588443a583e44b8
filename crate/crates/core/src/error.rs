use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("budget error: {0}")]
    Budget(String),

    #[error("write of {len} samples at offset {offset} exceeds accumulator of length {capacity}")]
    Bounds {
        offset: usize,
        len: usize,
        capacity: usize,
    },

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("failed to open {path}")]
    Open {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("malformed FASTA at line {line}: {reason}")]
    MalformedFasta { line: usize, reason: String },

    #[error("FASTA record {0:?} not found")]
    RecordNotFound(String),

    #[error("region {offset}+{len} out of bounds for sequence of length {available}")]
    RegionOutOfBounds {
        offset: usize,
        len: usize,
        available: usize,
    },

    #[error("bad magic: not a CFFT sample file")]
    BadMagic,

    #[error("unsupported CFFT version {0}")]
    UnsupportedVersion(u16),

    #[error("unknown CFFT precision code {0}")]
    UnknownPrecision(u16),

    #[error("truncated CFFT payload: header declares {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("worker pool: {0}")]
    Parallel(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }

    /// True for errors that mean "this configuration does not fit", as
    /// opposed to bad input or I/O failure.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}
