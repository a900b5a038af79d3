use std::path::PathBuf;

use thiserror::Error;

use crate::network::ModelKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cascade: {0}")]
    InvalidCascade(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected a {expected} network, got a {found} network")]
    WrongKind { expected: ModelKind, found: ModelKind },

    #[error("dimension mismatch: expected {expected} nodes, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An infected node had zero total hazard at its infection time, so the
    /// log-likelihood is not differentiable there.
    #[error("node {node} has zero hazard at its infection time in cascade {cascade}")]
    ZeroHazard { cascade: usize, node: usize },

    #[error("kronecker edge probability {max_prob} exceeds 1 after scaling to the degree target")]
    ScaleOverflow { max_prob: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
