//! The ADMM iteration, stopping rules and infeasibility detection.

mod infeasibility;
mod residuals;
mod solve;
mod workspace;

pub use infeasibility::{check_dual_infeasible, check_primal_infeasible};
pub use residuals::{check_termination, residuals, ResidualInfo};
pub use solve::{run, solve, solve_with_callback, Progress, RunOutcome};
pub use workspace::Workspace;
