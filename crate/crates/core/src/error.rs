use thiserror::Error;

use crate::model::Violation;

/// Errors surfaced by the solver and its preprocessing stages.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid problem: {}", join_violations(.0))]
    InvalidProblem(Vec<Violation>),

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("zero pivot at column {column} of the KKT factorization (matrix is not quasi-definite)")]
    ZeroPivot { column: usize },

    #[error("matrix is not quasi-definite: {positive} positive pivots, expected {expected}")]
    NotQuasiDefinite { positive: usize, expected: usize },

    #[error("matrix is not in upper-triangular storage (entry ({row}, {col}))")]
    NotUpperTriangular { row: usize, col: usize },

    #[error("eigendecomposition failed for a {side}x{side} PSD block")]
    Eigen { side: usize },

    #[error("projection failed for cone block {block}: {source}")]
    Projection {
        block: usize,
        #[source]
        source: Box<SolverError>,
    },

    #[error("length {0} is not a triangular number")]
    NotTriangular(usize),

    #[error("length {0} is not a perfect square")]
    NotSquare(usize),

    #[error("pattern is not chordal: {0}")]
    NotChordal(String),

    #[error("clique {clique} restriction is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotCompletable { clique: usize, min_eig: f64 },

    #[error("clique tree violates the running intersection property: {0}")]
    RunningIntersection(String),

    #[error("invalid merge: {0}")]
    InvalidMerge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, SolverError>;
