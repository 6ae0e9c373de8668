use thiserror::Error;

use crate::graph::VertexId;

/// Errors raised while enumerating, windowing or measuring a graph.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),
    #[error("function has no value at vertex {0}")]
    MissingValue(VertexId),
    #[error("ball not finite up to cap: more than {cap} vertices within radius {radius}")]
    BallCapExceeded { cap: usize, radius: f64 },
    #[error("vertex {vertex} has {count} neighbors, above the local finiteness cap {cap}")]
    DegreeCapExceeded { vertex: VertexId, count: usize, cap: usize },
    #[error("generator depth cap {0} exceeded")]
    DepthCapExceeded(usize),
    #[error("no length recorded for edge ({0}, {1})")]
    MissingLength(VertexId, VertexId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vertex {0} is not in the window")]
    NotInWindow(VertexId),
}

/// Errors from the linear solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("conjugate gradient did not converge after {iterations} iterations (scaled residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("system matrix has a non-positive diagonal entry at row {0}")]
    NonPositiveDiagonal(usize),
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("growth fit failed: {0}")]
    FitFailed(String),
    #[error("{0}")]
    Analysis(String),
}

/// Malformed text input, with the 1-based line number.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
