//! Recursive solver for Eulerian Laplacian systems.
//!
//! [`build_chain`] produces walks `W_0 … W_d` where each `I − W_{i+1}`
//! approximates `I − (W_i^{(α)})²`. [`solve_recursive`] turns the chain into
//! an implicit approximate pseudoinverse of `I − W_0` by nesting
//! preconditioned Richardson iterations, and [`solve_eulerian`] wraps it in
//! an outer Richardson loop on `D^{-1/2} L D^{-1/2}`.

mod chain;
mod lambda;
mod operator;
mod solve;

pub use chain::{
    build_chain, build_chain_with, ChainConfig, LevelStats, SquareChain, CHAIN_ALPHA, INITIAL_EPS, KERNEL_DRIFT_TOL,
};
pub use lambda::{estimate_lambda, LambdaConfig, LambdaEstimate};
pub use operator::{
    deflate, precon_richardson, unit_kernel, Budget, ChainLevel, LinearOperator, Richardson, ScaledIdentity,
    ShiftedWalk,
};
pub use solve::{
    base_ell, base_solver, budget_cap, chain_depth, chain_eps_hat, contraction_factor, level_delta, solve_eulerian,
    solve_eulerian_with, solve_recursive, CalibrationConfig, ChainSolver, LevelTrace, Schedule, SolveContext,
    SolveReport, SolverConfig, REPORT_VERSION,
};
