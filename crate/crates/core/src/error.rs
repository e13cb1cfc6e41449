use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point} is not a member of {space}")]
    PointNotInSpace { point: String, space: String },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("pair limit {limit} exceeds the enumeration bound n_max = {n_max}")]
    PairLimitExceeded { limit: u64, n_max: u64 },

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("{0}")]
    Eval(#[from] EvalError),

    #[error("index rule maps 1/{index} to invalid index {result}")]
    IndexRule { index: u64, result: i64 },

    #[error("map {map} cannot act on point {point}")]
    MapSpaceMismatch { map: String, point: String },

    #[error("tau = {tau} exceeds the domain cap {cap} of integrand `{name}`")]
    BeyondDomainCap { name: String, tau: f64, cap: f64 },

    #[error("invalid integrand argument tau = {0}")]
    InvalidTau(f64),

    #[error("quadrature of `{name}` on [0, {tau}] did not converge within {subdivisions} subdivisions (error estimate {error:e})")]
    QuadratureNotConverged { name: String, tau: f64, subdivisions: usize, error: f64 },

    #[error("{kind}: every tested pair was degenerate ({skipped} skipped)")]
    NoDefinedPairs { kind: String, skipped: usize },

    #[error("map evaluation failed at iteration {iteration}: {source}")]
    MapEval { iteration: usize, source: Box<Error> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("expected-values data is invalid: {0}")]
    InvalidExpected(String),
}
