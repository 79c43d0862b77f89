//! Per-run outputs.

use crate::types::{CoreId, SimTime, VcpuId, VmId};

/// Everything measured for one vCPU over one run. All counters are ticks
/// or counts, so equality is exact and the determinism contract is
/// byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcpuMetrics {
    pub vcpu: VcpuId,
    pub vm: VmId,
    pub core: CoreId,
    pub workload: String,
    pub is_writer: bool,
    pub regulated: bool,
    pub finished: bool,
    /// Completion time of a finite workload, or the run length for one
    /// that was still running at the end.
    pub execution_time: u64,
    pub bus_accesses: u64,
    pub busy_ticks: u64,
    pub stall_ticks: u64,
    pub idle_ticks: u64,
    pub interrupt_ticks: u64,
    pub periods_elapsed: u64,
    pub pmu_interrupts: u64,
}

impl VcpuMetrics {
    /// Fraction of the run this vCPU spent in interrupt handlers.
    pub fn overhead_ratio(&self, run_length: u64) -> f64 {
        if run_length == 0 {
            0.0
        } else {
            self.interrupt_ticks as f64 / run_length as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    pub final_time: u64,
    pub total_events: u64,
    pub bus_busy_ticks: u64,
    pub completed_accesses: u64,
    pub vcpus: Vec<VcpuMetrics>,
}

impl RunMetrics {
    pub fn vcpu(&self, vcpu: VcpuId) -> &VcpuMetrics {
        self.vcpus
            .iter()
            .find(|m| m.vcpu == vcpu)
            .expect("unknown vCPU")
    }

    /// Completed saturating-writer accesses per microsecond over `window`.
    pub fn cacheline_write_throughput(&self, window: SimTime) -> f64 {
        assert!(window.ticks() > 0, "window must be positive");
        let writes: u64 = self
            .vcpus
            .iter()
            .filter(|m| m.is_writer)
            .map(|m| m.bus_accesses)
            .sum();
        writes as f64 / window.as_us()
    }

    pub fn writer_vcpus(&self) -> impl Iterator<Item = &VcpuMetrics> {
        self.vcpus.iter().filter(|m| m.is_writer)
    }
}

/// One per-period regulator trace row, dumpable behind a flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegTraceRow {
    pub vcpu: VcpuId,
    pub period_index: u64,
    pub accesses_used: u64,
    pub idled: bool,
}
