use thiserror::Error;

/// Failure modes shared by every operation in the crate.
///
/// `Hypothesis` means a mathematical precondition does not hold for the input,
/// while `Integrity` means the implementation contradicted a proven
/// inequality or identity and signals a bug.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for failed hypotheses, 3 for integrity failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_) => 2,
            Error::Integrity(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
