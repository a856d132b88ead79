//! Error type shared across the core modules.

use alloc::string::String;

/// Errors surfaced by the core algorithms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    InvalidArgument(String),
    /// Vector or matrix dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// A value that must be finite is NaN or infinite.
    NonFinite(&'static str),
    /// An exhaustive computation was refused because the instance is too
    /// large to enumerate.
    InstanceTooLarge { required: u64, limit: u64 },
    /// The requested operation is not supported by the given component.
    Unsupported(&'static str),
    /// A serialized artifact could not be decoded.
    Format(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InstanceTooLarge { required, limit } => {
                write!(f, "instance too large: {required} terms exceeds limit {limit}")
            }
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
