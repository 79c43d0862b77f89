//! Deterministic discrete-event simulator of VM-centric memory-bandwidth
//! regulation on a shared memory bus.
//!
//! Multicore contention is modeled as a single channel with fixed service
//! time and round-robin arbitration over blocking cores. A regulator gives
//! each VM a bus-access budget per period, split across its vCPUs; a
//! per-vCPU counter idles a core that exhausts its quota until the next
//! period boundary, where a per-vCPU timer resets budgets and resumes
//! idled cores, charging the configured interrupt costs.
//!
//! The harness reproduces the evaluation methodology around that
//! mechanism: solo / interf / interf+mbr setups, budget and period sweeps,
//! and timer-overhead measurement, all emitting deterministic CSV tables.

pub mod bus;
pub mod calibrate;
pub mod config;
pub mod engine;
pub mod errors;
pub mod event;
pub mod harness;
pub mod metrics;
pub mod regulator;
pub mod results;
pub mod types;
pub mod workload;

pub use bus::{AccessRecord, BusModel};
pub use calibrate::{calibrate, CalibrationOutcome};
pub use config::{BaselineMode, ExperimentConfig, Setup, SweepAxis, CALIBRATED_SERVICE_TIME};
pub use engine::{SimSetup, Simulation, StopCondition, DEFAULT_MAX_EVENTS};
pub use errors::{CalibrationError, ConfigError, HarnessError, SimError};
pub use harness::{
    emit_results, measure_overhead, run_setup, sweep_budget, sweep_period, SetupResult,
    SweepResult,
};
pub use metrics::{RunMetrics, VcpuMetrics};
pub use regulator::{assign_budgets, timer_overhead_model, InterruptCosts, VcpuRegState, VmSpec};
pub use results::{ResultSet, ResultTable, Value};
pub use types::{CoreId, SimTime, VcpuId, VmId, TICKS_PER_US};
pub use workload::{load_trace, preset, preset_names, Action, WorkloadProfile};
