//! Crate error type.

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch between operands, or a non-square input where a
    /// square one is required.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An input failed a mathematical precondition; the message names the
    /// failing identity.
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation was asked for outside its supported parameter range.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An enumeration or dense object would exceed its size guard.
    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    /// Malformed matrix file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn too_large(msg: impl Into<String>) -> Self {
        Error::TooLarge(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
