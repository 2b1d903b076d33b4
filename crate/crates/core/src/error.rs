use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the library. Variants are grouped so a frontend can
/// map them to distinct exit statuses: I/O, file format, contract
/// violations, and embedding feasibility.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format {magic:?}: expected a P2 or P5 graymap")]
    UnsupportedFormat { magic: String },

    #[error("malformed graymap header: {detail}")]
    MalformedHeader { detail: String },

    #[error("unsupported maxval {maxval}: only 8-bit graymaps (maxval 255) are handled")]
    UnsupportedMaxval { maxval: u64 },

    #[error("bad dimensions {width}x{height}: width and height must be positive")]
    BadDimensions { width: u64, height: u64 },

    #[error("truncated pixel payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("sample value {value} out of range 0..=255")]
    SampleOutOfRange { value: u64 },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },

    #[error("pixel {index} differs by {delta}; embedding changes must be in -1..=1")]
    NonUnitChange { index: usize, delta: i32 },

    #[error("kernel of size {kernel} does not fit a {width}x{height} image (limit {limit})")]
    KernelTooLarge {
        kernel: usize,
        width: u32,
        height: u32,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("payload infeasible: {0}")]
    InfeasiblePayload(String),

    #[error("no convergence after {iterations} iterations while {what}")]
    NoConvergence { iterations: u32, what: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
