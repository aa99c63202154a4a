use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("mass at index {index} is not positive ({value})")]
    NonPositiveMass { index: usize, value: f64 },
    #[error("masses sum to {sum}, expected 1")]
    MassSum { sum: f64 },
    #[error("space is not a valid {mode}: {detail}")]
    Invalid { mode: &'static str, detail: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("infeasible transport problem: {0}")]
    Infeasible(String),
    #[error("refusing exponential-cost computation: {0}")]
    SizeCap(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("solver did not converge: {0}")]
    Convergence(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
