//! Shared-memory-bus contention model.
//!
//! Single channel, fixed service time, round-robin arbitration, blocking
//! in-order cores with at most one outstanding request each. Arbitration is
//! work-conserving: the channel never idles while a request is pending.

use crate::types::CoreId;

/// Bus parameters. The default service time is the LLC-miss-to-DRAM order
/// of magnitude; calibration overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BusModel {
    /// Ticks per access when the channel is free.
    pub service_time: u64,
}

impl Default for BusModel {
    fn default() -> Self {
        BusModel { service_time: 20 }
    }
}

/// One access, from issue to completion. Kept for tests and trace dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRecord {
    pub core: CoreId,
    pub issue_time: u64,
    pub grant_time: u64,
    pub complete_time: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct InService {
    core: usize,
    issue: u64,
    grant: u64,
    complete_at: u64,
}

/// Arbitration state for one run.
#[derive(Debug, Clone)]
pub struct BusState {
    service_time: u64,
    /// Issue time per core while its request waits for a grant.
    pending: Vec<Option<u64>>,
    in_service: Option<InService>,
    /// Next core the round-robin scan starts from.
    rr_next: usize,
    pub busy_ticks: u64,
    pub completed: u64,
}

impl BusState {
    pub fn new(num_cores: usize, model: BusModel) -> Self {
        assert!(model.service_time >= 1, "service_time must be at least 1");
        BusState {
            service_time: model.service_time,
            pending: vec![None; num_cores],
            in_service: None,
            rr_next: 0,
            busy_ticks: 0,
            completed: 0,
        }
    }

    pub fn service_time(&self) -> u64 {
        self.service_time
    }

    pub fn is_idle(&self) -> bool {
        self.in_service.is_none()
    }

    pub fn has_pending(&self, core: CoreId) -> bool {
        self.pending[core.0].is_some()
    }

    pub fn serving(&self) -> Option<CoreId> {
        self.in_service.map(|s| CoreId(s.core))
    }

    /// Queue a request. A second outstanding request from the same core is
    /// a logic error: cores are in-order and blocking.
    pub fn request(&mut self, core: CoreId, now: u64) {
        assert!(
            self.pending[core.0].is_none() && self.serving() != Some(core),
            "core {core} issued a second outstanding bus request at t={now}"
        );
        self.pending[core.0] = Some(now);
    }

    /// Pull a queued request back out (interrupt entry, regulator idling).
    /// In-service accesses cannot be withdrawn.
    pub fn withdraw(&mut self, core: CoreId) -> bool {
        self.pending[core.0].take().is_some()
    }

    /// Work-conserving grant pass: start serving the first pending core at
    /// or after the cursor. Returns the core served and its completion time.
    pub fn grant_next(&mut self, now: u64) -> Option<(CoreId, u64)> {
        if self.in_service.is_some() {
            return None;
        }
        let n = self.pending.len();
        for off in 0..n {
            let c = (self.rr_next + off) % n;
            if let Some(issue) = self.pending[c].take() {
                let complete_at = now + self.service_time;
                self.in_service = Some(InService {
                    core: c,
                    issue,
                    grant: now,
                    complete_at,
                });
                return Some((CoreId(c), complete_at));
            }
        }
        None
    }

    /// Completion at `now`: frees the channel and advances the cursor past
    /// the served core.
    pub fn complete(&mut self, core: CoreId, now: u64) -> AccessRecord {
        let s = self
            .in_service
            .take()
            .expect("bus completion with nothing in service");
        assert_eq!(s.core, core.0, "completion for the wrong core");
        assert_eq!(s.complete_at, now, "completion at the wrong time");
        self.rr_next = (s.core + 1) % self.pending.len();
        self.busy_ticks += self.service_time;
        self.completed += 1;
        AccessRecord {
            core,
            issue_time: s.issue,
            grant_time: s.grant,
            complete_time: now,
        }
    }
}
