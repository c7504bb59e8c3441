//! Online bipartite matching with decomposable weights and free disposal.
//!
//! Machines (offline vertices) have speeds, jobs (online vertices) have
//! sizes, and the weight of an edge is speed times size. A machine may be
//! handed many jobs but is credited only for the largest. The crate
//! provides the greedy baseline, the randomized interval algorithm, the
//! offline optimum, the closed-form competitive bound, three adversarial
//! instance families, and experiment drivers to check all of them.

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod harness;
pub mod instance;
pub mod io;
pub mod numfmt;
pub mod online;
pub mod par;

pub use error::{Error, Result};
pub use instance::{
    brute_force_opt, sorted_opt, validate_instance, Instance, OptSolution, Placement, RunTrace,
    ValueReport,
};
pub use online::{
    interval_index, run_greedy, run_interval, run_interval_random, DeterministicAlgorithm,
    IntervalParams, TieRule,
};

/// Interval base used whenever none is given.
pub const DEFAULT_C: f64 = 3.55829;
