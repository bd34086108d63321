use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An adaptive quadrature ran out of budget before reaching its
    /// tolerance.
    #[error("quadrature failed to converge: {context} (best error {best_error:e})")]
    QuadratureFailure { context: String, best_error: f64 },

    /// The antidivergence operator was handed a field violating one of
    /// its two compatibility conditions; both residuals are reported
    /// relative to the L1 mass of the field.
    #[error(
        "forcing violates compatibility conditions: |mean| = {mean_residual:e}, \
         |angular moment| = {moment_residual:e} (tolerance {tolerance:e} x L1 mass)"
    )]
    Incompatible {
        mean_residual: f64,
        moment_residual: f64,
        tolerance: f64,
    },

    /// The requested time puts the core outside the validity window
    /// `c(t) < L/4`.
    #[error("time {t} gives core thickness {c} >= L/4 = {limit}; outside validity window")]
    OutsideValidityWindow { t: f64, c: f64, limit: f64 },

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
