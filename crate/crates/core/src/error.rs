use thiserror::Error;

/// Errors raised by the consensus-dyn library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Hull or centroid construction hit a degenerate configuration it could not resolve.
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("Monte Carlo oracle unreliable: acceptance rate {rate:.3e} below {min:.0e}")]
    OracleUnreliable { rate: f64, min: f64 },

    /// A message payload did not match the receiving algorithm's memory layout.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("value {x} outside safe interval [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("safeness violation at round {round}, agent {agent}, component {component}: {detail}")]
    SafenessViolation {
        round: u64,
        agent: usize,
        component: usize,
        detail: String,
    },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidArgument(e.to_string())
    }
}
