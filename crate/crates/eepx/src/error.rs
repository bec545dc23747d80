use thiserror::Error;

use crate::eep::EepWitness;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid indicator matrix: {0}")]
    InvalidIndicator(String),

    #[error("partition is not an external equitable partition: {0}")]
    NotAnEep(EepWitness),

    #[error("infeasible planted model: {0}")]
    InfeasibleModel(String),

    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("eigensolver failed to converge on eigenvalue {index}")]
    EigenNoConvergence { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("low-pass ratio undefined: filter vanishes on the low band (ideal or degenerate)")]
    DegenerateLowPass,

    #[error("solver error: {0}")]
    Solver(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
