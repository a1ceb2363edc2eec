use thiserror::Error;

/// Errors produced by the sglab library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("quadrature for {what} did not converge: halving changed the result by {change:e}")]
    NonConvergence { what: &'static str, change: f64 },

    #[error("observable is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("overlap modulus {modulus} exceeds 1")]
    OverlapOutOfRange { modulus: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("norm drift {drift:e} in a single step at t = {t:e} exceeds the {limit:e} limit")]
    NormDrift { drift: f64, t: f64, limit: f64 },

    #[error("forbidden regime: I = {inner:e} exceeds M_s = {saturated:e} (implementation bug)")]
    Forbidden { inner: f64, saturated: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParams {
        field,
        reason: reason.into(),
    }
}
