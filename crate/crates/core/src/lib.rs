//! Inexact proximal linearized DC algorithms whose inner loops provably terminate.
//!
//! Problems have the form `min f = g − h` with `g = max_i g_i` a pointwise
//! maximum of smooth convex pieces and `h` convex, accessed through an
//! ε-subgradient oracle. The crate provides the problem model, ε-strict
//! subdifferentials with Wolfe projection, inner solvers for the proximal
//! subproblem, the tPLDCA and baseline outer loops, and the `|·|` counterexamples.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexamples;
pub mod dca;
mod error;
pub mod inner;
pub mod problem;
mod quadmax;
pub mod registry;
pub mod subdiff;

pub use counterexamples::{
    ap_solution_set_abs, run_example_32, ApSolutionSet, Example32Row, NonTerminationReport,
};
pub use dca::{
    criticality_residual, descent_gap, select_u, souza_descent_gap, souza_solve, strict_gap,
    tpldca_solve, tpldca_solve_with_distance, AbsEpsDistance, InnerSample, IterateRecord,
    SolveStatus, SolveTrace, SolverConfig, SolverConfigBuilder, StrictDistance, SubdiffDistance,
    ZetaSchedule,
};
pub use error::{DcError, Result};
pub use inner::{
    build_subproblem, ista_solver, scripted_solver, subgradient_solver, InnerSolver, Ista,
    ScriptedSolver, StepPolicy, SubgradientSolver, Subproblem,
};
pub use problem::{
    dc_value, ConvexOracle, DcProblem, GSplit, MaxSmoothFunction, SmoothConvexPiece, Vector,
};
pub use registry::{registry_get, ProblemName, REGISTRY_NAMES};
