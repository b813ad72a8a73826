use thiserror::Error;

/// Errors surfaced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A computation would exceed the configured memory budget.
    #[error("memory budget exceeded: {required} bytes required, budget is {budget} bytes")]
    Resource { required: u64, budget: u64 },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
