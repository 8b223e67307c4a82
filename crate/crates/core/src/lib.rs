//! First-order conic solver based on ADMM, with chordal decomposition and
//! clique merging for sparse semidefinite constraints.

pub mod admm;
pub mod chordal;
pub mod cones;
pub mod error;
pub mod io;
pub mod linalg;
pub mod merging;
pub mod model;

pub use admm::{solve, solve_with_callback, Progress};
pub use error::{Result, SolverError};
pub use model::*;
