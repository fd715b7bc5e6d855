use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was not met by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A distance that must be strictly positive vanished.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("degenerate likelihood for UAV {uav}: zero noise variance with nonzero residual")]
    DegenerateLikelihood { uav: usize },

    #[error("rank-deficient fusion: summed information matrix is singular")]
    RankDeficientFusion,

    #[error("rank-deficient solve: normal matrix is singular and no damping was given")]
    RankDeficientSolve,

    #[error("unobservable geometry: Fisher information is singular (reciprocal condition {rcond:e})")]
    Unobservable { rcond: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
