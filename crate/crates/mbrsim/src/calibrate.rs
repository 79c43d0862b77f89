//! Deterministic grid calibration of the contention model.
//!
//! The platform's absolute latencies are not observable from the reference
//! ratios alone, so the bus service time and the memory-intensive profile's
//! access intensity are fitted together: a grid search runs the
//! one-critical-plus-interferers topology solo and contended and picks the
//! pair whose execution-time ratio lands closest to the target.

use crate::bus::BusModel;
use crate::engine::{single_vm_setup, Simulation, StopCondition, DEFAULT_MAX_EVENTS};
use crate::errors::CalibrationError;
use crate::regulator::{InterruptCosts, VmSpec};
use crate::types::{SimTime, VmId};
use crate::workload::WorkloadProfile;

/// Service-time grid, ticks: start, end inclusive, step.
pub const SERVICE_GRID: (u64, u64, u64) = (20, 80, 2);
/// Intensity grid, accesses per kilo-instruction: start, end inclusive, step.
pub const INTENSITY_GRID: (u32, u32, u32) = (4, 60, 2);
/// Accepted relative deviation from the target ratio.
pub const TOLERANCE: f64 = 0.10;

/// Instruction count used for calibration runs; small enough to keep the
/// grid cheap, long enough to wash out startup transients.
const CALIBRATION_INSTRUCTIONS: u64 = 50_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOutcome {
    pub bus: BusModel,
    /// Fitted intensity of the memory-intensive profile.
    pub intensity: u32,
    pub achieved_ratio: f64,
}

/// Contended-over-solo execution time of an intensity profile against
/// `interferers` saturating writers, at the given bus parameters.
pub fn interference_ratio(service_time: u64, intensity: u32, interferers: usize) -> f64 {
    interference_ratio_n(service_time, intensity, interferers, CALIBRATION_INSTRUCTIONS)
}

pub fn interference_ratio_n(
    service_time: u64,
    intensity: u32,
    interferers: usize,
    instructions: u64,
) -> f64 {
    let bus = BusModel { service_time };
    let critical = WorkloadProfile::intensity("critical", intensity, instructions)
        .expect("grid intensities are valid");
    // An unregulated VM; single_vm_setup fills in the vCPU list.
    let vm = VmSpec {
        vm: VmId(0),
        name: "cal".into(),
        budget: 0,
        period: SimTime::from_us(10),
        custom_dist: None,
        vcpus: Vec::new(),
        regulated: false,
        pmu_irq: false,
        costs: InterruptCosts::default(),
    };

    let solo = run_exec_time(single_vm_setup(bus, vec![critical.clone()], vm.clone()));
    let mut workloads = vec![critical];
    for _ in 0..interferers {
        workloads.push(WorkloadProfile::saturating_writer());
    }
    let contended = run_exec_time(single_vm_setup(bus, workloads, vm));
    contended as f64 / solo as f64
}

fn run_exec_time(setup: crate::engine::SimSetup) -> u64 {
    let mut setup = setup;
    setup.max_events = DEFAULT_MAX_EVENTS;
    let mut sim = Simulation::new(setup).expect("calibration setup is valid");
    sim.run_until(StopCondition::AllFiniteDone)
        .expect("calibration run within event budget");
    sim.metrics().vcpus[0].execution_time
}

/// Grid search for `(service_time, intensity)` hitting the target
/// contended-over-solo ratio for one critical core against `interferers`
/// saturating writers. Scan order is fixed (service then intensity,
/// ascending; first strict improvement wins), so the result is
/// deterministic.
pub fn calibrate(
    target_slowdown: f64,
    interferers: usize,
) -> Result<CalibrationOutcome, CalibrationError> {
    if interferers == 0 {
        // Nothing contends; the solo ratio is exactly 1.
        if (target_slowdown - 1.0).abs() < f64::EPSILON {
            return Ok(CalibrationOutcome {
                bus: BusModel::default(),
                intensity: INTENSITY_GRID.0,
                achieved_ratio: 1.0,
            });
        }
        return Err(CalibrationError::Unreachable {
            target: target_slowdown,
            interferers,
            bound: 1.0,
        });
    }
    // Round-robin over a single channel bounds any core's slowdown by the
    // number of requesters.
    let bound = (interferers + 1) as f64;
    if target_slowdown > bound || target_slowdown < 1.0 {
        return Err(CalibrationError::Unreachable {
            target: target_slowdown,
            interferers,
            bound,
        });
    }

    let mut best: Option<(f64, u64, u32, f64)> = None;
    let (s0, s1, ds) = SERVICE_GRID;
    let (i0, i1, di) = INTENSITY_GRID;
    let mut s = s0;
    while s <= s1 {
        let mut a = i0;
        while a <= i1 {
            let ratio = interference_ratio(s, a, interferers);
            let err = (ratio - target_slowdown).abs();
            if best.is_none_or(|(e, ..)| err < e) {
                best = Some((err, s, a, ratio));
            }
            a += di;
        }
        s += ds;
    }
    let (err, service_time, intensity, achieved) = best.expect("grid is non-empty");
    if err / target_slowdown > TOLERANCE {
        return Err(CalibrationError::OutOfTolerance {
            target: target_slowdown,
            tolerance_pct: TOLERANCE * 100.0,
            service_time,
            intensity,
            achieved,
        });
    }
    Ok(CalibrationOutcome {
        bus: BusModel { service_time },
        intensity,
        achieved_ratio: achieved,
    })
}
