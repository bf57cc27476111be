use thiserror::Error;

/// Errors produced by state validation, schedule construction and audits.
#[derive(Debug, Error)]
pub enum Error {
    /// A quantity left the domain where the formulas are defined
    /// (non-positive warp value, radius outside a piece's interval, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied object violates a documented precondition
    /// (non-orthonormal plane frame, unequal warps on the equal-warp path, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A warp schedule or profile could not be built from the given parameters.
    #[error("construction failed: {0}")]
    Construction(String),

    /// A linear system was numerically singular even after retries.
    #[error("singular system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}
