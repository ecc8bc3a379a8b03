// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two operands carry different qubit counts or dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A qubit count outside the supported range.
    #[error("unsupported qubit count m = {m}: {reason}")]
    InvalidQubitCount { m: usize, reason: &'static str },

    /// A copy count other than 2 or 3.
    #[error("unsupported copy count t = {0} (expected 2 or 3)")]
    InvalidCopyCount(usize),

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A matrix expected to be symplectic is not.
    #[error("matrix is not symplectic")]
    NotSymplectic,

    /// A matrix expected to be symmetric is not.
    #[error("operator is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    /// A requested size exceeds the configured resource cap.
    #[error("resource cap exceeded: {what} = {requested} > cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// A numeric argument is outside its valid range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// A name did not match any known variant.
    #[error("unknown {kind}: {name}")]
    Unknown { kind: &'static str, name: String },

    /// Exact arithmetic overflowed its integer representation.
    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
