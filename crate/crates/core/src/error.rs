//! Library-wide error type. Numeric undecidability is an error here on
//! purpose: callers that compare interval quantities must either get a
//! definite sign or a refusal, never a silent guess.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("comparison undecidable at {bits} bits (|value| <= {error_bound:e})")]
    Undecidable { bits: u32, error_bound: f64 },

    #[error("factorization guard: {0} exceeds the supported magnitude")]
    FactorGuard(String),

    #[error("{0} is not squarefree or is out of the supported range")]
    BadFieldDiscriminant(i64),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unstable integrand: {0}")]
    UnstableIntegrand(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
