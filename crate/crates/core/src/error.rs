use thiserror::Error;

/// Errors produced by the numerical machinery.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("maximization did not converge, achieved residual {residual:.3e}")]
    NonConvergence { residual: f64 },

    #[error("quadrature budget exceeded, achieved relative error {achieved:.3e}")]
    QuadratureBudget { achieved: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
