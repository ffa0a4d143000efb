//! Delay-optimal joint allocation of local clocks, upload time and energy,
//! server capacity and semantic extraction factors for mobile edge
//! computing.
//!
//! The [`solver`] minimizes the largest device delay under per-device energy
//! budgets; [`baselines`] provides raw-upload and local-only references;
//! [`oracle`] brute-forces small instances to check the solver; [`bench`]
//! loads scenario files, runs parameter sweeps and writes CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod model;
pub mod oracle;
pub mod solver;

pub use model::{
    Allocation, DelayBreakdown, DeviceAllocation, EnergyBreakdown, ModelError, SemanticParams,
    SystemConfig, TerminalDevice,
};
pub use solver::{solve, FeasibilityCause, FeasibilityError, SolveError, SolverReport};
