use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown station id {0}")]
    UnknownStation(usize),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("co-channel query across channels: transmission on {tx}, receiver on {rx}")]
    CrossChannel { tx: usize, rx: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("analytics error: {0}")]
    Analytics(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("timeline assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
