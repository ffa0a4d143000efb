//! Scenario loading, parameter sweeps and CSV output.

mod scenario;
mod sweep;

pub use scenario::{load_scenario, ChannelSpec, DeviceSpec, Scenario, ScenarioError};
pub use sweep::{
    emit_csv, run_sweep, run_sweep_with, write_csv, Algorithm, CellFailure, Sweep, SweepOptions, SweepOutcome,
    SweepParam, SweepResult, CSV_HEADER, VERIFY_PROBES, VERIFY_STEP,
};
