use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A sampling function left the open unit disk along the orbit.
    #[error("invalid Verblunsky generator: |f(T^n x)| = {modulus} >= 1 at n = {n}")]
    GeneratorInvalid { n: i64, modulus: f64 },

    /// The operator is numerically singular at the requested spectral parameter.
    #[error("spectral parameter is numerically in the spectrum (condition estimate {condition:e})")]
    NearSpectrum { condition: f64 },

    #[error("reduction unavailable: {0}")]
    ReductionUnavailable(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("energy {energy} outside the tabulated range [{lo}, {hi}]")]
    Extrapolation { energy: f64, lo: f64, hi: f64 },

    #[error("window holds {found} eigenvalues, need at least {needed}; widen it")]
    WidenWindow { found: usize, needed: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for failures caused by the numerics rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearSpectrum { .. } | Error::Numerical(_) | Error::GeneratorInvalid { .. }
        )
    }
}
