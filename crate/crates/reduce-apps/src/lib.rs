//! Reductions built on an Eulerian solver.
//!
//! Every routine takes the inner solver as an [`EulerianSolver`] handle.
//!
//! | Item | Purpose |
//! |------|---------|
//! | [`crude_solve_ill_conditioned`] | ½-accurate Eulerian solves through polynomially conditioned contracted systems |
//! | [`compute_stationary`] | stationary distributions by scaled restarted solves |
//! | [`eulerian_scale`] | positive `x` making `L·diag(x)` Eulerian |
//! | [`solve_full`] | `L x = b` for strongly connected directed Laplacians |
//! | [`personalized_pagerank`] | restarted walks through a column-dominant system |
//!
//! [`EulerianSolver`]: dirlap_core::EulerianSolver

mod crude;
mod full;
mod patch;
mod stationary;

pub use crude::{
    crude_solve_ill_conditioned, crude_solve_with, default_scale_parameter, CrudeConfig, CrudeReport, ScaleLadder,
    ScaleLevel,
};
pub use full::{
    personalized_pagerank, personalized_pagerank_with, solve_full, solve_full_with, FullConfig, FullReport,
    PageRankConfig,
};
pub use patch::{refine, solve_patched, solve_regularized, DominantSystem, Refinement};
pub use stationary::{
    compute_stationary, compute_stationary_with, eulerian_scale, eulerian_scale_with, restart_schedule, walk_residual,
    ScaleConfig, ScaleReport, StationaryConfig, StationaryResult, MIN_INNER_EPS,
};
