//! Nonmonotone adaptive steepest descent for finite minimax problems and its
//! reference-vector extension to multiobjective optimization.
//!
//! * [`problem`]: smooth component bundles, the max-function and active sets.
//! * [`subproblem`]: the direction-finding QP, solved through its simplex dual.
//! * [`solver`]: the outer iteration with the adaptive step controller.
//! * [`scalarization`]: Das-Dennis reference vectors, Tchebycheff bundles and front solves.
//! * [`benchmarks`]: test problems with analytic Pareto oracles.
//! * [`report`]: CSV/JSON writers.

pub mod benchmarks;
pub mod error;
pub mod problem;
pub mod report;
pub mod scalarization;
pub mod solver;
pub mod subproblem;

pub use error::{Error, Result};
pub use problem::{ActiveSet, Component, DecisionPoint, FnComponent, ObjectiveBundle};
pub use scalarization::{
    build_tchebycheff, das_dennis, non_dominated_filter, solve_front, DScaling, FrontOptions, FrontPoint,
    ReferenceVector, TchebycheffProblem,
};
pub use solver::{decrease_test, solve_minimax, IterationTrace, SolverConfig, StepController, TerminationReason};
pub use subproblem::{project_simplex, solve_sp, stationarity_residual, DirectionSolution, SubproblemInput};
