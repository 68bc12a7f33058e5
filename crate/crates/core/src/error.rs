use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or continued fraction did not settle within its term budget.
    /// This signals an argument range the evaluator was never meant to see.
    #[error("internal error: {what} did not converge after {terms} terms")]
    NoConvergence { what: &'static str, terms: usize },

    /// Mortality data violates a table invariant.
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// A query reaches past the stored ages of a model.
    #[error("age {age} is outside the model range ({detail})")]
    OutOfRange { age: u32, detail: String },

    /// The contract specification is inconsistent.
    #[error("invalid contract: {0}")]
    InvalidContract(String),

    /// Adaptive quadrature could not meet its tolerance.
    #[error("quadrature on [{a}, {b}] reached {subdivisions} subdivisions with error estimate {error:e}")]
    Quadrature {
        a: f64,
        b: f64,
        subdivisions: usize,
        error: f64,
    },

    /// The inverse-CDF sampler was asked for survival mass beyond the truncation age.
    #[error("mass beyond truncation: target survival {target:e} is below the survivorship {floor:e} at the horizon")]
    MassBeyondTruncation { target: f64, floor: f64 },

    /// Malformed input data (CSV rows, flags).
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
