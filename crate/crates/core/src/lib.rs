//! Multi-day needs-based activity demand model.
//!
//! Activity participation, location and duration follow from maximizing the
//! utility of a psychological inventory that activities replenish and daily
//! consumption depletes. The crate provides:
//!
//! - the deterministic optimization model and an exact condition-based
//!   solver for it ([`solver`]),
//! - piecewise-linear approximation of the Cobb-Douglas production curve
//!   ([`pwl`]),
//! - the empirical layer: logit mixture choice with nest error components,
//!   duration measurement error and simulated likelihood ([`empirical`]),
//! - derivative-free maximum likelihood estimation ([`estimate`]),
//! - Monte Carlo synthesis of zones, individuals and observed patterns
//!   ([`synth`]).
//!
//! Slow reference solvers used for verification live in [`oracle`] behind
//! the `verification` feature.
//!
//! Data-parallel loops use rayon when the default `parallel` feature is
//! enabled and plain iterators otherwise; results are identical either way.

// Validators use `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod empirical;
pub mod estimate;
pub mod io;
pub mod math;
pub mod model;
pub mod pwl;
pub mod solver;
pub mod synth;

mod optim;
mod par;
mod rng;

#[cfg(test)]
pub(crate) mod test_util;

#[cfg(any(test, feature = "verification"))]
pub mod oracle;
#[cfg(not(any(test, feature = "verification")))]
#[allow(dead_code)]
pub(crate) mod oracle;

pub use error::{FitError, LikelihoodError, ModelError, SolveError};
pub use model::{
    check_feasibility, consumption_vector, evaluate_objective, production, ActivityPattern,
    Horizon, InventoryTrajectory, ModelParams, ProductionSpec, ScenarioInputs, SolveResult,
};
