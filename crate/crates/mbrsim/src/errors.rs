//! Error types for configuration, simulation, and the experiment harness.

use thiserror::Error;

/// A configuration problem, carrying the `section.key` path it was found at.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Runtime simulation failures.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimError {
    /// Livelock guard: the run exceeded its event budget.
    #[error("aborted at t={now}: event limit of {limit} exceeded (livelock guard)")]
    EventLimit { limit: u64, now: u64 },
}

/// Problems loading a workload trace file.
#[derive(Debug, Error)]
pub enum TraceLoadError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace file contains no records")]
    Empty,
    #[error("trace file does not end with a newline")]
    MissingNewline,
}

/// Calibration search failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CalibrationError {
    #[error(
        "target slowdown {target} is unreachable with {interferers} interferer(s): \
         round-robin arbitration bounds a saturating core's slowdown by the core count ({bound})"
    )]
    Unreachable {
        target: f64,
        interferers: usize,
        bound: f64,
    },
    #[error(
        "no grid point reaches {target} within {tolerance_pct}% \
         (best: service_time={service_time}, intensity={intensity}, ratio={achieved:.4})"
    )]
    OutOfTolerance {
        target: f64,
        tolerance_pct: f64,
        service_time: u64,
        intensity: u32,
        achieved: f64,
    },
}

/// Harness-level failures.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("no baseline for workload '{0}': run the solo setup first or set run.baseline = auto")]
    MissingBaseline(String),
    #[error("empty sweep: no values to run")]
    EmptySweep,
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}
