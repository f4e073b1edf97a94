//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(String),

    #[error("point lies at the north pole of the sphere (z = {z})")]
    NorthPole { z: f64 },

    #[error("argument outside the admissible domain: {0}")]
    DomainError(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("curve is tangent to a curvature line at t = {t} (|F' x N'| = {cross:e})")]
    NonGeneric { t: f64, cross: f64 },

    #[error("cannot resolve the sign of phi' at t = {t}: residuals {plus:e} / {minus:e}")]
    Ambiguous { t: f64, plus: f64, minus: f64 },

    #[error("u' or v' leaves the first quadrant at t = {t} (phi' = {re} + {im}i)")]
    QuadrantViolation { t: f64, re: f64, im: f64 },

    #[error("vanishing derivative of the Gauss map data at {0}")]
    ZeroDerivative(String),

    #[error("vanishing edge length: {0}")]
    ZeroEdge(String),

    #[error("value exceeded cap {cap:e} at {location}")]
    BlowUp { cap: f64, location: String },

    #[error("node outside the evolution domain: {0}")]
    OutOfDomain(String),

    #[error("no valid cells remain in the evaluation domain")]
    EmptyDomain,

    #[error("error level {index} underflows to zero")]
    ZeroError { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("sampling too coarse: step {step:e} exceeds the required {required:e}")]
    Resolution { step: f64, required: f64 },

    #[error("{context}: {message}")]
    Io { context: String, message: String },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            message: err.to_string(),
        }
    }
}
