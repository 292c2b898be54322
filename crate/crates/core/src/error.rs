//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires a nonempty composition")]
    EmptyComposition,

    #[error("composition ({0}) is not admissible (first part must exceed 1)")]
    NotAdmissible(String),

    #[error("element is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid eta exponent vector: {0}")]
    InvalidEtaSpec(String),

    #[error("invalid series descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("truncation bound exceeded: requested degree {requested}, bound {bound}")]
    TruncationExceeded { requested: u32, bound: u32 },

    #[error(
        "tolerance {tol:.3e} unreachable within {budget} terms (best error estimate {achieved:.3e})"
    )]
    ToleranceUnreachable { tol: f64, budget: u64, achieved: f64 },

    #[error("extrapolation fit is singular (collinear samples)")]
    SingularFit,

    #[error("extrapolation needs {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error(
        "extrapolated limit {value:.12e} is inconsistent with the rigorous tail bound \
         (last partial sum {partial:.12e}, tail bound {tail:.3e})"
    )]
    ExtrapolationInconsistent { value: f64, partial: f64, tail: f64 },

    #[error("unknown identity family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}`: {msg}")]
    OutOfRange { family: String, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache format error: {0}")]
    CacheFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
