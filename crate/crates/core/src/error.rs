use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used to pick process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or configuration.
    InvalidInput,
    /// Well-formed input that a stage could not process.
    Processing,
    /// Filesystem or codec failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("rectangle {rect} does not fit inside a {width}x{height} image")]
    RectOutOfBounds {
        rect: crate::raster::PixelRect,
        width: usize,
        height: usize,
    },
    #[error("size mismatch: expected {expected:?}, got {actual:?}")]
    SizeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("mask is not binary (found value {0})")]
    NonBinaryMask(f32),
    #[error("image {width}x{height} is too small for a border of {border} pixels")]
    ImageTooSmall {
        width: usize,
        height: usize,
        border: usize,
    },
    #[error("no foreground object found")]
    ObjectNotFound,
    #[error("hole mask covers the whole image")]
    HoleCoversImage,
    #[error("keypoint {index} has a singular jacobian (det = {det:e})")]
    SingularJacobian { index: usize, det: f64 },
    #[error("keypoint count mismatch: expected {expected}, got {actual}")]
    KeypointCountMismatch { expected: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("invalid driving sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid animation job: {0}")]
    InvalidJob(String),
    #[error("palette has {0} colors, more than a GIF can hold")]
    TooManyColors(usize),
    #[error("frame {index} is {actual:?}, expected {expected:?}")]
    FrameSizeMismatch {
        index: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: png decode failed: {message}")]
    PngDecode { path: PathBuf, message: String },
    #[error("png encode failed: {0}")]
    PngEncode(String),
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Stage { source, .. } => source.kind(),
            // a missing input file is a caller mistake, not a failing device
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => ErrorKind::InvalidInput,
            Error::Io { .. } | Error::PngDecode { .. } | Error::PngEncode(_) => ErrorKind::Io,
            Error::ObjectNotFound
            | Error::HoleCoversImage
            | Error::SingularJacobian { .. }
            | Error::TooManyColors(_) => ErrorKind::Processing,
            _ => ErrorKind::InvalidInput,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// Tag an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
