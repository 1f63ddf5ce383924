use thiserror::Error;

/// Errors raised by the problem model, the subdifferential machinery and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A user oracle (or an inner solver built on one) produced NaN or Inf.
    #[error("oracle fault: {what} is not finite at x = {x:?}")]
    OracleFault { what: String, x: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    /// The inner solver needs a smooth + proximable split the problem does not provide.
    #[error("problem `{0}` has no smooth/proximable split; use the subgradient inner solver")]
    MissingSplit(String),
}

pub type Result<T> = std::result::Result<T, DcError>;

impl DcError {
    pub(crate) fn fault(what: impl Into<String>, x: &crate::Vector) -> Self {
        DcError::OracleFault {
            what: what.into(),
            x: x.iter().copied().collect(),
        }
    }
}
