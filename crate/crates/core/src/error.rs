use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("extended operator undefined for tau_c = {tau_c}; use the baseline Schrödinger solver")]
    BaselineOnly { tau_c: f64 },

    #[error("ill-defined regime: omega * tau_c = {product} >= 1")]
    IllDefinedRegime { product: f64 },

    #[error("resolvent singular: E1 = {e1} collides with an H_(m/2) eigenvalue (gap {gap:.3e}, threshold {threshold:.3e})")]
    SingularResolvent { e1: f64, gap: f64, threshold: f64 },

    #[error("resolvent overlap <Phi|R|Phi> = {overlap:.3e} is too small relative to {scale:.3e}")]
    DegenerateResolventOverlap { overlap: f64, scale: f64 },

    #[error("eigensolver failure in {routine} (info = {info}): {detail}")]
    Eigensolver { routine: &'static str, info: i32, detail: String },

    #[error("linear solve failure in {routine} (info = {info})")]
    LinearSolve { routine: &'static str, info: i32 },

    #[error("norm drift {drift:.3e} at step {step} exceeds {limit:.1e}")]
    NormDrift { step: usize, drift: f64, limit: f64 },

    #[error("requested {requested} items but only {available} are available")]
    NotEnough { requested: usize, available: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Errors that come from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularResolvent { .. }
                | Error::DegenerateResolventOverlap { .. }
                | Error::Eigensolver { .. }
                | Error::LinearSolve { .. }
                | Error::NormDrift { .. }
                | Error::NotEnough { .. }
        )
    }

    pub fn is_regime(&self) -> bool {
        matches!(self, Error::IllDefinedRegime { .. })
    }
}
