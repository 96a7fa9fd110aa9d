//! Crate-wide error type.
//!
//! File-format failures get distinct variants so callers (and the CLI
//! exit-code mapping) can tell bad magic from truncation from shape
//! mismatch without string matching.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or layer shapes do not line up.
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    /// A scalar argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// File does not start with the expected magic bytes.
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    /// Recognized file with an unsupported format version.
    #[error("unsupported version {found}, expected {expected}")]
    BadVersion { expected: u32, found: u32 },

    /// File ended before the declared payload was complete.
    #[error("unexpected EOF in {0}")]
    UnexpectedEof(String),

    /// File holds bytes past the declared payload.
    #[error("trailing bytes: {0} extra byte(s) after payload")]
    TrailingBytes(u64),

    /// A data file contains NaN or infinite entries.
    #[error("non-finite value in {0}")]
    NonFiniteData(String),

    /// A computation produced or received NaN or infinite values.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A feature file or instance set with zero instances.
    #[error("empty instance set: {0}")]
    EmptyInstanceSet(String),

    /// Malformed manifest row; `line` is 1-based and counts the header.
    #[error("manifest error at line {line}: {detail}")]
    Manifest { line: usize, detail: String },

    /// Checkpoint tensors do not match the model configuration.
    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),

    /// Rank correlation of a constant series has a zero denominator.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// A video id that is not present in the manifest.
    #[error("unknown video id {0:?}")]
    UnknownVideo(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }
}
