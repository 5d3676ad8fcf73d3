use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument failed validation (non-finite value, empty input,
    /// out-of-range parameter, misaligned grid, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured resource cap (cell count, raster size) would be exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A projection map was evaluated outside its domain of definition.
    #[error("projection undefined: {0}")]
    MapUndefined(String),

    /// Results that contradict an invariant the caller relies on
    /// (for example a vanishing length estimate for a set of positive mass).
    #[error("inconsistent result: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
