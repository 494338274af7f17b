use thiserror::Error;

/// Errors raised by space construction, spectral computations and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("mesh edge graph is not connected ({components} components)")]
    DisconnectedMesh { components: usize },

    #[error("matrix is not symmetric: max |S - S^T| = {deviation:e}")]
    Asymmetric { deviation: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (max residual {max_residual:e})")]
    EigenNoConvergence { iterations: usize, max_residual: f64 },

    #[error("truncation tail {tail:e} not below {delta:e} within cutoff {cutoff}; increase the spectral cutoff")]
    TruncationUnreachable { tail: f64, delta: f64, cutoff: usize },

    #[error("scale {radius} is under-resolved (sample spacing {spacing})")]
    UnderResolved { radius: f64, spacing: f64 },

    #[error("eigenvalue {0} is not in the spectrum")]
    NotInSpectrum(f64),

    #[error("eigenmap construction failed: {0}")]
    Eigenmap(String),

    #[error("harmonic flow step collapsed after {steps} steps (eta {eta:e})")]
    StepCollapse { steps: usize, eta: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
