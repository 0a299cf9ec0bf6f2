use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain volume {volume} must exceed 1 (domain volume ≤ 1)")]
    DomainTooSmall { volume: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate density: raw field has zero mass")]
    DegenerateDensity,
    #[error("negative density {value} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("exact transport needs {pairs} cell pairs, above the cap of {cap}; use sinkhorn_w2")]
    TooLarge { pairs: usize, cap: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("trajectory has no pressure at frame {0}")]
    MissingPressure(usize),
    #[error("trajectories are not aligned: {0}")]
    Misaligned(String),
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
