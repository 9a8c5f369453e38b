use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the quantum, classical and extraction pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for spectrum of dimension {dim}")]
    OutOfBounds { index: usize, dim: usize },

    #[error("spectrum degenerate or outside the alternating-parity regime: {0}")]
    Degeneracy(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resonant pair tracking lost: second-best overlap {overlap:.3} below floor {floor}")]
    TrackingLost { overlap: f64, floor: f64 },

    #[error("integration accuracy: energy drift {drift:e} exceeds {tol:e}")]
    IntegrationAccuracy { drift: f64, tol: f64 },

    #[error("energy {energy} is outside the rotational orbit family")]
    EnergyOutOfFamily { energy: f64 },

    #[error("root not found: {0}")]
    NotFound(String),

    #[error("island not found: {0}")]
    IslandNotFound(String),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("separatrix tracing failed: {0}")]
    TracingFailed(String),

    #[error("monodromy determinant {det} deviates from 1; retry with a different finite-difference step")]
    StepSize { det: f64 },

    #[error("fixed point is not elliptic (trace {trace})")]
    UnstablePoint { trace: f64 },

    #[error("degenerate island: S+ and S- coincide")]
    DegenerateIsland,

    #[error("arccos domain: monodromy trace {trace} outside (-2, 2)")]
    ArccosDomain { trace: f64 },

    #[error("invalid fit: {0}")]
    InvalidFit(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that signal a broken numerical contract rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_) | Error::Io(_) | Error::Cache { .. }
        )
    }
}
