use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("m = {0} is outside the hyperbolic range (need m >= 5)")]
    NotHyperbolic(usize),
    #[error("m = {0} exceeds the supported maximum of {1}")]
    TooLarge(usize, usize),
    #[error("invalid systole label: {0}")]
    BadLabel(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("search timed out: {0}")]
    Timeout(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("indeterminate rank: {0}")]
    IndeterminateRank(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) | Error::IndeterminateRank(_) | Error::Numerical(_) => 2,
            Error::Timeout(_) => 3,
            _ => 1,
        }
    }
}
