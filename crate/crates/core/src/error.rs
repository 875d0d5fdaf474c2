use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// |k| >= 1 for L > 1 and |k| >= 2 for L = 1, otherwise the modified
    /// Kolmogorov inner product degenerates.
    #[error("wavenumber constraint violated: L = {l}, k = {k} (need |k| >= 2 when L = 1, |k| >= 1 when L > 1)")]
    WavenumberConstraint { l: f64, k: i64 },

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("advection substep lost unitarity (defect {defect:.3e} at dt = {dt}); reduce the time step")]
    UnitarityDefect { defect: f64, dt: f64 },

    #[error("non-finite coefficients at t = {t}")]
    NonFinite { t: f64 },

    #[error("trace never falls below {theta} of its initial value (last sample t = {t_end})")]
    NoCrossing { theta: f64, t_end: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) map to a distinct CLI
    /// exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularOperator(_)
                | Error::UnitarityDefect { .. }
                | Error::NonFinite { .. }
                | Error::NoCrossing { .. }
        )
    }
}
