//! Linear programming: the generic program type, a revised simplex solver
//! and the threshold program built on top of them.

mod presolve;
mod program;
mod simplex;
mod threshold;

pub use presolve::{independent_rows, RowSelection, PIVOT_THRESHOLD};
pub use program::LinearProgram;
pub use simplex::{solve_lp, LpSolution, LpSolver, LpStatus, Residuals, SimplexOptions, SimplexSolver};
pub use threshold::{
    analytic_start, build_threshold_lp, feasible_at, feasible_at_with, threshold, threshold_of_tensor, threshold_with,
    CertificateCheck, JointDistribution, ThresholdResult,
};
