//! Identifier and time types shared across the simulator.

use std::fmt;
use std::ops::{Add, AddAssign};

/// Simulation ticks per microsecond. One tick models one nanosecond, so a
/// 1 µs regulation period spans 1000 ticks.
pub const TICKS_PER_US: u64 = 1000;

/// A point in simulated time, in ticks since the start of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_us(us: u64) -> SimTime {
        SimTime(us * TICKS_PER_US)
    }

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn as_us(self) -> f64 {
        self.0 as f64 / TICKS_PER_US as f64
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: u64) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl AddAssign<u64> for SimTime {
    fn add_assign(&mut self, rhs: u64) {
        self.0 += rhs;
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// A physical core. Cores are the unit of bus arbitration.
    CoreId
);
id_type!(
    /// A virtual machine. Regulation parameters are declared per VM.
    VmId
);
id_type!(
    /// A virtual CPU, statically pinned 1:1 to a core and owned by one VM.
    VcpuId
);
