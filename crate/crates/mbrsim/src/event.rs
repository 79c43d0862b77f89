//! Deterministic event queue.
//!
//! Events with equal timestamps dispatch in a fixed total order: kind
//! priority first, then insertion sequence. Runs of the same setup replay
//! the same event log independent of heap internals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::types::{CoreId, SimTime, VcpuId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Period boundary on a regulated vCPU: budget reset, idle release.
    TimerTick(VcpuId),
    /// Budget-overflow interrupt delivery on a vCPU.
    PmuOverflow(VcpuId),
    /// The bus access granted to this core finishes service.
    BusComplete(CoreId),
    /// A core re-evaluates its state: end of a compute span or of an
    /// interrupt handler. Carries a generation so stale wakes are dropped.
    CoreWake(CoreId, u64),
    /// A finite workload retired its last instruction.
    WorkloadDone(CoreId),
    /// End-of-instant bus arbitration pass.
    BusArbitrate,
}

impl EventKind {
    /// Fixed dispatch priority among simultaneous events. Timer resets run
    /// before overflow deliveries, so a budget that would overflow exactly
    /// at a period boundary is reset rather than punished. Arbitration runs
    /// last so every request issued at an instant competes in one pass.
    pub fn priority(self) -> u8 {
        match self {
            EventKind::TimerTick(_) => 0,
            EventKind::PmuOverflow(_) => 1,
            EventKind::BusComplete(_) => 2,
            EventKind::CoreWake(..) => 3,
            EventKind::WorkloadDone(_) => 4,
            EventKind::BusArbitrate => 5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: SimTime,
    pub kind: EventKind,
    pub seq: u64,
}

impl Event {
    fn key(&self) -> (u64, u8, u64) {
        (self.time.0, self.kind.priority(), self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for earliest-first.
        other.key().cmp(&self.key())
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        EventQueue::default()
    }

    /// Enqueue an event. Scheduling into the past is a logic error and
    /// aborts the run.
    pub fn schedule(&mut self, now: SimTime, time: SimTime, kind: EventKind) {
        assert!(
            time >= now,
            "event scheduled in the past: {:?} at t={} while now is t={}",
            kind,
            time,
            now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, kind, seq });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
