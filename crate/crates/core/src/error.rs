use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for a space with {modes} modes")]
    ModeIndex { index: usize, modes: usize },

    #[error("invalid mode space: {0}")]
    InvalidSpace(String),

    #[error("operator/state dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("total Hilbert-space dimension {0} exceeds the dense-matrix budget")]
    DimensionOverflow(usize),

    #[error("truncation too small: |alpha|^2 = {mean_photons} exceeds dim/4 = {limit}")]
    Truncation { mean_photons: f64, limit: f64 },

    #[error("operator is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("negative collapse rate {0}")]
    NegativeRate(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("integrator step size collapsed at t = {t:e} s (last stable step {max_stable_step:e} s)")]
    StepSize { t: f64, max_stable_step: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing parameter: {0}")]
    MissingParameter(String),

    #[error("{0} is unbounded")]
    Unbounded(String),

    #[error("T2 = {t2:e} s exceeds 2 T1 = {limit:e} s")]
    DephasingBound { t2: f64, limit: f64 },

    #[error("charge basis did not converge: {0}")]
    Convergence(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
