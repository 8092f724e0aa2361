use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("theta series truncated at {terms} terms leaves relative tail {tail:.3e}")]
    ThetaTruncation { terms: usize, tail: f64 },

    #[error("not a divisor pair: x1 + x2 - l_sum = {residual:.3e} away from the lattice")]
    NotDivisorPair { residual: f64 },

    #[error("multiplication fit residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("section zero finding failed: {0}")]
    RootFinding(String),

    #[error("point is not on the requested secant locus: {0}")]
    NotOnSecant(String),

    #[error("null space has dimension {dim}, expected {expected}; spectrum tail {spectrum:?}")]
    NullSpace {
        dim: usize,
        expected: usize,
        spectrum: Vec<f64>,
    },

    #[error("rejection sampling exhausted after {0} attempts")]
    RejectionBudget(usize),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("cache mismatch: {0}")]
    Cache(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
