//! Self-contained convex engines: Dykstra alternating projections for
//! affine ∩ PSD feasibility (with bisection on a linear objective), and a
//! dense two-phase simplex.
//!
//! Infeasibility here is a *heuristic* verdict (stalled projection gap),
//! never a mathematical certificate; callers that need soundness report
//! "infeasible at tolerance" language.

mod dykstra;
mod simplex;

pub use dykstra::{
    dykstra_feasibility, maximize_linear_psd, verify_report, AffinePsdProblem, DykstraOptions,
    SolveReport, SolveStatus, SparseHerm,
};
pub use simplex::{lp_solve, LpBuilder, LpProblem, LpSolution, Relation};
