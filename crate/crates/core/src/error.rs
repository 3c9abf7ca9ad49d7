use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The cumulative drug effect integral does not converge (hill shape times k-shape <= 1).
    #[error("cumulative effect diverges: gamma * alpha_k = {0} must exceed 1")]
    Divergent(f64),
    #[error("quadrature failed to reach tolerance: {0}")]
    Quadrature(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sampler error: {0}")]
    Sampler(String),
    #[error("{failed} of {total} replicates failed, over the 1% budget; first: {first}")]
    FailureBudget { failed: usize, total: usize, first: String },
    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
