use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The requested computation exceeds a configured size limit.
    #[error("{what} of size {size} exceeds the cap of {cap}{hint}")]
    ResourceCap {
        what: &'static str,
        size: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("Tsallis not extensive for any q: requires at least 3 independent magnon directions, got {0}")]
    NotExtensive(usize),

    /// An internal consistency check failed.
    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
