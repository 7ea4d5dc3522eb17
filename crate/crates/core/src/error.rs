use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameters are valid numbers but a theorem's hypothesis fails.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {abs_error:e}")]
    Quadrature { value: f64, abs_error: f64 },

    /// A Monte Carlo request exceeds the configured compute budget.
    #[error("compute budget exceeded: need {required:e} pair evaluations, limit {limit:e}")]
    Budget { required: f64, limit: f64 },

    #[error("input error: {0}")]
    Input(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn hypothesis<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Hypothesis(msg.into()))
}
