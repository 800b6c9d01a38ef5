use std::io;

use thiserror::Error;

/// Errors produced anywhere in the sampling → generation → comparison chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("node {node} out of range for graph with {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },

    #[error("clustering undefined for node {node} with degree {degree} (< 2)")]
    UndefinedClustering { node: usize, degree: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("sample trace method is {found}, expected {expected}")]
    WrongMethod {
        expected: &'static str,
        found: &'static str,
    },

    #[error("JDD repair failed: {0}")]
    RepairFailure(String),

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("{metric} timed out after {elapsed_ms} ms")]
    Timeout { metric: &'static str, elapsed_ms: u128 },

    #[error("{metric} skipped: {reason}")]
    Skipped { metric: &'static str, reason: String },

    #[error("eigensolver converged {converged} of {requested} eigenvalues")]
    NotConverged { converged: usize, requested: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
