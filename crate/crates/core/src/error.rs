use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fell outside its documented bounds.
    #[error("out of bounds: {0}")]
    Bounds(String),

    /// Vector/matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A NaN or infinity showed up where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An argument failed validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    /// An internal invariant was violated (a bug, not a caller error).
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The checkpoint bytes are structurally unreadable.
    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    /// The checkpoint checksum does not match its payload (corrupt or truncated file).
    #[error("checkpoint checksum mismatch: {0}")]
    ChecksumMismatch(String),

    /// The checkpoint was written by an incompatible format version.
    #[error("checkpoint incompatible: {0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
