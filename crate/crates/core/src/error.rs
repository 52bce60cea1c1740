use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Error)]
pub enum ScarError {
    /// Chain length outside the supported even range.
    #[error("unsupported chain length {0}: L must be even with 4 <= L <= 24")]
    InvalidLength(usize),

    /// Two objects built for different chain lengths were combined.
    #[error("length mismatch: basis has L = {basis}, parameters have L = {params}")]
    LengthMismatch { basis: usize, params: usize },

    /// Dimension of a vector or operator does not match the basis.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bias g must be finite, got {0}")]
    NonFiniteBias(f64),

    #[error("time {0} is not finite")]
    NonFiniteTime(f64),

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("relative tolerance {0} outside the open interval (1e-12, 1e-4)")]
    InvalidTolerance(f64),

    /// The adaptive integrator could not make progress.
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("vector is not unit-normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("cut of {len} sites starting at {start} is invalid for L = {length}")]
    InvalidCut { start: usize, len: usize, length: usize },

    /// A dense factorization failed to converge.
    #[error("{what} failed to converge{}", .g.map(|g| format!(" at g = {g}")).unwrap_or_default())]
    Decomposition { what: &'static str, g: Option<f64> },

    /// Entropy evaluation failed for a particular eigenvector.
    #[error("eigenvector {alpha}: {source}")]
    AtEigenvector {
        alpha: usize,
        #[source]
        source: Box<ScarError>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ScarError>;
