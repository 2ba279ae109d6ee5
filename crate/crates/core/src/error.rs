use alloc::string::String;

/// Errors raised by the palette pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no color passed the filter after {attempts} attempts")]
    FilterUnsatisfiable { attempts: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("name vector is all zero")]
    DegenerateVector,
    #[error("at least two class colors are required, got {0}")]
    TooFewColors(usize),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("k must satisfy 1 <= k < {n}, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("every class color is locked")]
    AllLocked,
    #[error("palette refinement failed: {reason}")]
    RefinementFailed { reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
