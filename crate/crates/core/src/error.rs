use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("kernel validation failed: {0}")]
    KernelInvalid(String),

    #[error("size guard exceeded: {what} = {value} (limit {limit})")]
    SizeGuard {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("trigonometric degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("solver did not converge at lambda = {re}{im:+}i after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        re: f64,
        im: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("division guard: |lambda - psi| = {0:.3e} at a quadrature node")]
    DivisionGuard(f64),

    #[error("kernel is not rank one (relative residual {0:.3e})")]
    NotRankOne(f64),

    #[error("indices not in general position: {0}")]
    NotGeneralPosition(String),

    #[error("degenerate resultant: {0}")]
    Degenerate(String),

    #[error("elimination collapsed: {0}")]
    EliminationCollapse(String),

    #[error("curve failed verification (residual {0:.3e})")]
    Unverified(f64),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
