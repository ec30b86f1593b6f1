use thiserror::Error;

/// Errors produced by kernel evaluation, certification and verification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input outside the domain of the operation: {0}")]
    InputDomain(String),

    #[error("unsupported degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("malformed weight family: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(
        "truncation failed: achieved bound {achieved:e} after {terms} terms (target {target:e})"
    )]
    Truncation {
        achieved: f64,
        target: f64,
        terms: usize,
    },

    #[error("point is not in the kernel domain: {0}")]
    Domain(String),

    #[error("quadrature with {nodes} nodes cannot integrate degree {degree} exactly")]
    QuadratureDegree { nodes: usize, degree: usize },

    #[error("refused: {0}")]
    Refused(String),

    #[error("configuration mismatch: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
