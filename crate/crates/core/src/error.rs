use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the contour engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed netpbm data at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("unsupported maxval {0} (only 1..=255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("truncated pixel payload at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pixel ({x}, {y}) is outside a {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("window size must be odd and at least 3, got {0}")]
    InvalidWindow(usize),

    #[error("unsupported window size {0} for reference neighbourhoods (only 3)")]
    UnsupportedWindow(usize),

    #[error("unsupported delta_l {0} (expected 8 or 16)")]
    UnsupportedDeltaL(u32),

    #[error("background and foreground intensities must differ (both {0})")]
    EqualIntensities(u8),

    #[error("canvas {0} is too small for the pattern shape (minimum 16)")]
    CanvasTooSmall(usize),

    #[error("dual index {0} outside 1..=14")]
    IndexOutOfRange(usize),

    #[error("reference list is empty")]
    EmptyReferences,

    #[error("exemplar image is empty")]
    EmptyExemplar,

    #[error("query regions are equal (both {0}); no boundary to classify")]
    DegenerateQuery(u8),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
