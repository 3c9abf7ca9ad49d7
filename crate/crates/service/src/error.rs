use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Engine(#[from] pedoop::Error),
    #[error("trial {0} not found")]
    NotFound(String),
    /// The request is well formed but not allowed in the trial's current phase.
    #[error("{0}")]
    Conflict(String),
    /// The request body does not satisfy the schema.
    #[error("{0}")]
    Invalid(String),
    #[error("corrupt event log for trial {trial}: {message}")]
    Corrupt { trial: String, message: String },
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Io(e.to_string())
    }
}
