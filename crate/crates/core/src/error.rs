use alloc::boxed::Box;
use alloc::string::String;

use crate::estimators::EstimateReport;
use crate::solvers::SolveDiagnostics;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Best iterate returned alongside a solver failure.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSolve {
    pub estimate: alloc::vec::Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("support function is unbounded in this direction")]
    Unbounded,
    #[error("vector is not representable by the dictionary")]
    NoRepresentation,
    #[error("no closed form available for {0}")]
    NoClosedForm(&'static str),
    #[error("zero vector")]
    ZeroVector,
    #[error("zero matrix")]
    ZeroMatrix,
    #[error("invalid link: {0}")]
    InvalidLink(String),
    #[error("link carries no information (lambda = {0:e})")]
    NonInformative(f64),
    #[error("solver did not converge after {} iterations", .0.diagnostics.iterations)]
    NotConverged(Box<PartialSolve>),
    #[error("feasible set and observation constraint do not intersect (residual {residual:e})")]
    EmptyIntersection { residual: f64 },
    #[error("no estimate reproduces every observed sign (best agreement {:.4})", .0.agreement.unwrap_or(0.0))]
    NotFeasible(Box<EstimateReport>),
    #[error("no pair of samples shared a cell; increase the number of pairs")]
    InsufficientPairs,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
