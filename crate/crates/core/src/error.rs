use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The two convex sets overlap, so no common perpendicular exists.
    #[error("no common perpendicular: {0}")]
    NoPerpendicular(String),

    /// An enumeration bound or an intermediate value exceeded the supported range.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A limit evaluator or a pruned search did not settle.
    #[error("stabilization failure: {0}")]
    Stabilization(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
