use thiserror::Error;

use crate::lp::LpStatus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    /// A computed quantity left its admissible range by more than rounding allows.
    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    #[error("linear program not solved to optimality (status {0:?})")]
    Solver(LpStatus),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
