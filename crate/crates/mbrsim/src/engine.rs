//! Deterministic discrete-event engine tying the bus, the regulator, and
//! the per-core workloads together.
//!
//! Execution model per core: retire compute instructions at `base_cpi`
//! ticks each, block on at most one outstanding bus access, pause while an
//! interrupt handler runs, and freeze entirely while idled by the
//! regulator. Every state change happens inside an event handler and every
//! simultaneous-event tie is broken by a fixed total order, so identical
//! setups replay identical event logs.
//!
//! Interrupt handling pulls a queued-but-ungranted bus request back out of
//! the arbiter and re-issues it when the handler returns; an access already
//! in service cannot be retracted and completes normally. A core idled by
//! the regulator loses its queued request the same way and re-issues it
//! when the next period releases it.

use crate::bus::{AccessRecord, BusModel, BusState};
use crate::errors::{ConfigError, SimError};
use crate::event::{Event, EventKind, EventQueue};
use crate::metrics::{RegTraceRow, RunMetrics, VcpuMetrics};
use crate::regulator::{assign_budgets, VcpuRegState, VmSpec};
use crate::types::{CoreId, SimTime, VcpuId, VmId};
use crate::workload::{Action, Cursor, WorkloadProfile};

/// Livelock guard: a run processing more events than this aborts.
pub const DEFAULT_MAX_EVENTS: u64 = 1_000_000_000;

/// Optional spacing jitter for intensity profiles. Off by default; when on,
/// each vCPU derives its stream from `seed` plus its id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JitterSpec {
    pub amplitude: u64,
    pub seed: u64,
}

/// A fully resolved platform: everything the engine needs for one run.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub num_cores: usize,
    pub bus: BusModel,
    pub vms: Vec<VmSpec>,
    /// vCPU -> pinned core, 1:1.
    pub vcpu_cores: Vec<CoreId>,
    /// vCPU -> owning VM.
    pub vcpu_vms: Vec<VmId>,
    /// vCPU -> workload.
    pub workloads: Vec<WorkloadProfile>,
    pub max_events: u64,
    pub jitter: Option<JitterSpec>,
}

impl SimSetup {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_cores == 0 {
            return Err(ConfigError::new("platform.num_cores", "need at least one core"));
        }
        if self.bus.service_time == 0 {
            return Err(ConfigError::new("bus.service_time", "must be at least 1 tick"));
        }
        let n = self.vcpu_cores.len();
        if self.vcpu_vms.len() != n || self.workloads.len() != n {
            return Err(ConfigError::new("vm", "inconsistent vCPU tables"));
        }
        let mut seen = vec![false; self.num_cores];
        for (v, core) in self.vcpu_cores.iter().enumerate() {
            if core.0 >= self.num_cores {
                return Err(ConfigError::new(
                    format!("vm.{}.cores", self.vcpu_vms[v].0),
                    format!("core {} does not exist (platform has {})", core.0, self.num_cores),
                ));
            }
            if seen[core.0] {
                return Err(ConfigError::new(
                    format!("vm.{}.cores", self.vcpu_vms[v].0),
                    format!("core {} is pinned twice", core.0),
                ));
            }
            seen[core.0] = true;
        }
        for vm in &self.vms {
            vm.validate(&format!("vm.{}", vm.vm.0))?;
            for v in &vm.vcpus {
                if v.0 >= n || self.vcpu_vms[v.0] != vm.vm {
                    return Err(ConfigError::new(
                        format!("vm.{}", vm.vm.0),
                        "vCPU table does not match the VM's vCPU list",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCondition {
    /// Run through the end of this instant, then stop.
    At(SimTime),
    /// Stop at the end of the instant in which the last finite workload
    /// finishes.
    AllFiniteDone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CoreMode {
    Running,
    HandlingInterrupt,
    IdledByRegulator,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outstanding {
    None,
    Pending,
    InService,
}

/// Where a core's current time segment is charged. A handler dominates an
/// outstanding access; idle dominates nothing (an idled core has no work).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bucket {
    Busy,
    Stall,
    Idle,
    Irq,
    Done,
}

struct CoreRt {
    vcpu: Option<VcpuId>,
    cursor: Cursor,
    finite: bool,
    mode: CoreMode,
    outstanding: Outstanding,
    /// A queued request was pulled out by a handler or by idling and must
    /// be re-issued on resume.
    needs_reissue: bool,
    /// End of the compute span in progress, if any.
    gap_wake_at: Option<u64>,
    /// Compute ticks left when a handler froze the span.
    gap_left: Option<u64>,
    handler_until: u64,
    wake_gen: u64,
    done_at: Option<u64>,
    // Time accounting: the open segment [seg_start, now) belongs to the
    // bucket of the state in force since seg_start.
    seg_start: u64,
    busy_ticks: u64,
    stall_ticks: u64,
    idle_ticks: u64,
    interrupt_ticks: u64,
}

impl CoreRt {
    fn bucket(&self) -> Bucket {
        match self.mode {
            CoreMode::Finished => Bucket::Done,
            CoreMode::HandlingInterrupt => Bucket::Irq,
            CoreMode::IdledByRegulator => Bucket::Idle,
            CoreMode::Running => {
                if self.outstanding != Outstanding::None {
                    Bucket::Stall
                } else {
                    Bucket::Busy
                }
            }
        }
    }

    fn flush(&mut self, now: u64) {
        let span = now - self.seg_start;
        self.seg_start = now;
        if span == 0 {
            return;
        }
        match self.bucket() {
            Bucket::Busy => self.busy_ticks += span,
            Bucket::Stall => self.stall_ticks += span,
            Bucket::Idle => self.idle_ticks += span,
            Bucket::Irq => self.interrupt_ticks += span,
            Bucket::Done => {}
        }
    }
}

pub struct Simulation {
    setup: SimSetup,
    now: u64,
    queue: EventQueue,
    cores: Vec<CoreRt>,
    bus: BusState,
    regs: Vec<Option<VcpuRegState>>,
    vcpu_accesses: Vec<u64>,
    finite_left: usize,
    arb_scheduled_at: Option<u64>,
    events_processed: u64,
    final_time: u64,
    // Optional recorders, off by default.
    record_accesses: bool,
    access_log: Vec<AccessRecord>,
    record_events: bool,
    event_log: Vec<(u64, u8, u64)>,
    record_reg_trace: bool,
    reg_trace: Vec<RegTraceRow>,
}

impl Simulation {
    pub fn new(setup: SimSetup) -> Result<Self, ConfigError> {
        setup.validate()?;
        let num_vcpus = setup.vcpu_cores.len();

        let mut core_vcpu: Vec<Option<VcpuId>> = vec![None; setup.num_cores];
        for (v, core) in setup.vcpu_cores.iter().enumerate() {
            core_vcpu[core.0] = Some(VcpuId(v));
        }

        let mut regs: Vec<Option<VcpuRegState>> = vec![None; num_vcpus];
        for vm in &setup.vms {
            if !vm.regulated {
                continue;
            }
            for (vcpu, quota) in assign_budgets(vm)? {
                regs[vcpu.0] = Some(VcpuRegState::new(vcpu, quota));
            }
        }

        let mut cores = Vec::with_capacity(setup.num_cores);
        for &vcpu in &core_vcpu {
            let (cursor, finite) = match vcpu {
                Some(v) => {
                    let profile = &setup.workloads[v.0];
                    let jitter = setup
                        .jitter
                        .map(|j| (j.amplitude, j.seed.wrapping_add(v.0 as u64)));
                    let cursor = Cursor::new(profile, jitter);
                    (cursor, profile.is_finite())
                }
                None => (Cursor::empty(), false),
            };
            cores.push(CoreRt {
                vcpu,
                cursor,
                finite,
                mode: if vcpu.is_some() {
                    CoreMode::Running
                } else {
                    CoreMode::Finished
                },
                outstanding: Outstanding::None,
                needs_reissue: false,
                gap_wake_at: None,
                gap_left: None,
                handler_until: 0,
                wake_gen: 0,
                done_at: None,
                seg_start: 0,
                busy_ticks: 0,
                stall_ticks: 0,
                idle_ticks: 0,
                interrupt_ticks: 0,
            });
        }
        let finite_left = cores.iter().filter(|c| c.finite).count();
        let bus = BusState::new(setup.num_cores, setup.bus);

        let mut sim = Simulation {
            now: 0,
            queue: EventQueue::new(),
            cores,
            bus,
            regs,
            vcpu_accesses: vec![0; num_vcpus],
            finite_left,
            arb_scheduled_at: None,
            events_processed: 0,
            final_time: 0,
            record_accesses: false,
            access_log: Vec::new(),
            record_events: false,
            event_log: Vec::new(),
            record_reg_trace: false,
            reg_trace: Vec::new(),
            setup,
        };

        // Kick every mapped core off with a zero-length compute span so the
        // first real action dispatches through the normal wake path.
        for c in 0..sim.cores.len() {
            if sim.cores[c].vcpu.is_some() {
                sim.cores[c].gap_wake_at = Some(0);
                sim.schedule(0, EventKind::CoreWake(CoreId(c), 0));
            }
        }
        // First period boundary of every regulated vCPU.
        for vm_idx in 0..sim.setup.vms.len() {
            let vm = &sim.setup.vms[vm_idx];
            if !vm.regulated {
                continue;
            }
            let period = vm.period.ticks();
            for &v in vm.vcpus.clone().iter() {
                sim.schedule(period, EventKind::TimerTick(v));
            }
        }
        Ok(sim)
    }

    pub fn record_accesses(&mut self, on: bool) {
        self.record_accesses = on;
    }

    pub fn record_events(&mut self, on: bool) {
        self.record_events = on;
    }

    pub fn record_reg_trace(&mut self, on: bool) {
        self.record_reg_trace = on;
    }

    pub fn now(&self) -> SimTime {
        SimTime(self.now)
    }

    pub fn access_log(&self) -> &[AccessRecord] {
        &self.access_log
    }

    pub fn event_log(&self) -> &[(u64, u8, u64)] {
        &self.event_log
    }

    pub fn reg_trace(&self) -> &[RegTraceRow] {
        &self.reg_trace
    }

    fn schedule(&mut self, at: u64, kind: EventKind) {
        self.queue.schedule(SimTime(self.now), SimTime(at), kind);
    }

    /// Drives the run to the stop condition and returns the final time.
    /// Identical setups produce identical event logs and metrics.
    pub fn run_until(&mut self, stop: StopCondition) -> Result<SimTime, SimError> {
        let stop_at = match stop {
            StopCondition::At(t) => Some(t.ticks()),
            StopCondition::AllFiniteDone => None,
        };
        if stop_at.is_none() && self.finite_left == 0 {
            // Nothing to wait for; an all-infinite platform needs a horizon.
            self.finalize(self.now);
            return Ok(SimTime(self.final_time));
        }
        let mut drain_instant: Option<u64> = None;
        while let Some(next) = self.queue.peek_time() {
            if let Some(t) = stop_at {
                if next.ticks() > t {
                    break;
                }
            }
            if let Some(d) = drain_instant {
                if next.ticks() > d {
                    break;
                }
            }
            let ev = self.queue.pop().unwrap();
            self.events_processed += 1;
            if self.events_processed > self.setup.max_events {
                return Err(SimError::EventLimit {
                    limit: self.setup.max_events,
                    now: ev.time.ticks(),
                });
            }
            debug_assert!(ev.time.ticks() >= self.now, "time went backwards");
            self.now = ev.time.ticks();
            if self.record_events {
                self.event_log
                    .push((ev.time.ticks(), ev.kind.priority(), event_payload(ev)));
            }
            self.dispatch(ev);
            if stop_at.is_none() && self.finite_left == 0 && drain_instant.is_none() {
                // Finish every event of the current instant so the cut is
                // a whole tick, then stop.
                drain_instant = Some(self.now);
            }
        }
        let end = match stop {
            StopCondition::At(t) => t.ticks().max(self.now),
            StopCondition::AllFiniteDone => self.now,
        };
        self.finalize(end);
        Ok(SimTime(end))
    }

    fn finalize(&mut self, end: u64) {
        self.final_time = end;
        for c in 0..self.cores.len() {
            self.cores[c].flush(end);
        }
        if self.record_reg_trace {
            for reg in self.regs.iter().flatten() {
                self.reg_trace.push(RegTraceRow {
                    vcpu: reg.vcpu,
                    period_index: reg.period_index,
                    accesses_used: reg.accesses_this_period,
                    idled: reg.idled_this_period || reg.idled,
                });
            }
        }
    }

    fn dispatch(&mut self, ev: Event) {
        match ev.kind {
            EventKind::TimerTick(v) => self.on_timer_tick(v),
            EventKind::PmuOverflow(v) => self.on_pmu_overflow(v),
            EventKind::BusComplete(c) => self.on_bus_complete(c),
            EventKind::CoreWake(c, gen) => self.on_core_wake(c, gen),
            EventKind::WorkloadDone(c) => self.on_workload_done(c),
            EventKind::BusArbitrate => self.on_arbitrate(),
        }
    }

    // ----- regulator paths -------------------------------------------------

    fn on_timer_tick(&mut self, v: VcpuId) {
        let now = self.now;
        let vm = &self.setup.vms[self.setup.vcpu_vms[v.0].0];
        let period = vm.period.ticks();
        let d_timer = vm.costs.d_timer;
        self.schedule(now + period, EventKind::TimerTick(v));

        let reg = self.regs[v.0].as_mut().expect("timer on unregulated vCPU");
        if self.record_reg_trace {
            self.reg_trace.push(RegTraceRow {
                vcpu: v,
                period_index: reg.period_index,
                accesses_used: reg.accesses_this_period,
                idled: reg.idled_this_period || reg.idled,
            });
        }
        reg.on_timer_tick();

        let core = self.setup.vcpu_cores[v.0].0;
        if self.cores[core].mode != CoreMode::Finished {
            self.charge_handler(core, d_timer);
        }
    }

    fn on_pmu_overflow(&mut self, v: VcpuId) {
        let reg = self.regs[v.0].as_mut().expect("overflow on unregulated vCPU");
        reg.overflow_pending = false;
        reg.pmu_interrupts += 1;
        let core = self.setup.vcpu_cores[v.0].0;
        if self.cores[core].mode == CoreMode::Finished {
            return;
        }
        if reg.remaining == 0 {
            reg.idled = true;
            reg.idled_this_period = true;
            // A timer inside the handler window may have reset the budget;
            // then the overflow is stale and idles nothing.
        }
        let idled = self.regs[v.0].as_ref().unwrap().idled;
        let c = &mut self.cores[core];
        if self.now >= c.handler_until && c.mode == CoreMode::HandlingInterrupt {
            c.flush(self.now);
            if idled {
                c.mode = CoreMode::IdledByRegulator;
                if self.bus.withdraw(CoreId(core)) {
                    // Regulator idling cancels a queued request outright.
                    self.cores[core].outstanding = Outstanding::None;
                    self.cores[core].needs_reissue = true;
                }
            } else {
                c.mode = CoreMode::Running;
                self.resume(core);
            }
        }
        // Otherwise another handler still runs; its end wake settles.
    }

    /// Occupies `core` with an interrupt handler for `cost` ticks,
    /// serializing after any handler already in flight. Workload progress
    /// stops: a compute span freezes and a queued bus request is pulled
    /// back until the handler returns.
    fn charge_handler(&mut self, core: usize, cost: u64) {
        let now = self.now;
        let c = &mut self.cores[core];
        c.flush(now);
        let base = c.handler_until.max(now);
        c.handler_until = base + cost;
        match c.mode {
            CoreMode::Running => {
                if c.outstanding == Outstanding::Pending {
                    self.bus.withdraw(CoreId(core));
                    c.outstanding = Outstanding::None;
                    c.needs_reissue = true;
                }
                if let Some(wake_at) = c.gap_wake_at.take() {
                    c.gap_left = Some(wake_at - now);
                }
                c.mode = CoreMode::HandlingInterrupt;
            }
            CoreMode::IdledByRegulator => {
                c.mode = CoreMode::HandlingInterrupt;
            }
            CoreMode::HandlingInterrupt => {}
            CoreMode::Finished => return,
        }
        c.wake_gen += 1;
        let gen = c.wake_gen;
        let until = c.handler_until;
        self.schedule(until, EventKind::CoreWake(CoreId(core), gen));
    }

    // ----- bus paths -------------------------------------------------------

    fn on_bus_complete(&mut self, core_id: CoreId) {
        let now = self.now;
        let core = core_id.0;
        let record = self.bus.complete(core_id, now);
        if self.record_accesses {
            self.access_log.push(record);
        }

        let c = &mut self.cores[core];
        debug_assert_eq!(c.outstanding, Outstanding::InService);
        c.flush(now);
        c.outstanding = Outstanding::None;

        let mut raise_overflow = false;
        let mut d_pmu = 0;
        if let Some(v) = self.cores[core].vcpu {
            self.vcpu_accesses[v.0] += 1;
            if let Some(reg) = self.regs[v.0].as_mut() {
                let vm = &self.setup.vms[self.setup.vcpu_vms[v.0].0];
                if reg.on_access_retired(vm.pmu_irq) {
                    reg.overflow_pending = true;
                    raise_overflow = true;
                    d_pmu = vm.costs.d_pmu;
                }
            }
        }
        if raise_overflow {
            let v = self.cores[core].vcpu.unwrap();
            self.charge_handler(core, d_pmu);
            let until = self.cores[core].handler_until;
            self.schedule(until, EventKind::PmuOverflow(v));
        }
        if self.cores[core].mode == CoreMode::Running {
            self.continue_workload(core);
        } else if self.cores[core].cursor.peek_done() {
            // The retired access was the workload's last action; completion
            // is observable even though a handler or the regulator froze
            // the core.
            self.schedule(now, EventKind::WorkloadDone(core_id));
        }
        // Channel freed: somebody else may start at this instant.
        self.schedule_arbitration();
    }

    fn on_arbitrate(&mut self) {
        self.arb_scheduled_at = None;
        if let Some((core, complete_at)) = self.bus.grant_next(self.now) {
            debug_assert_eq!(self.cores[core.0].outstanding, Outstanding::Pending);
            self.cores[core.0].outstanding = Outstanding::InService;
            self.schedule(complete_at, EventKind::BusComplete(core));
        }
    }

    /// Arbitration runs once per instant, after every event of that
    /// instant, so the outcome never depends on the order requests were
    /// issued within the tick.
    fn schedule_arbitration(&mut self) {
        if self.arb_scheduled_at != Some(self.now) {
            self.arb_scheduled_at = Some(self.now);
            self.schedule(self.now, EventKind::BusArbitrate);
        }
    }

    // ----- workload paths --------------------------------------------------

    fn on_core_wake(&mut self, core_id: CoreId, gen: u64) {
        let core = core_id.0;
        let now = self.now;
        if gen != self.cores[core].wake_gen {
            return; // stale
        }
        match self.cores[core].mode {
            CoreMode::HandlingInterrupt => {
                debug_assert!(now >= self.cores[core].handler_until);
                let idled = self.cores[core]
                    .vcpu
                    .and_then(|v| self.regs[v.0].as_ref())
                    .is_some_and(|r| r.idled);
                let c = &mut self.cores[core];
                c.flush(now);
                if idled {
                    c.mode = CoreMode::IdledByRegulator;
                } else {
                    c.mode = CoreMode::Running;
                    self.resume(core);
                }
            }
            CoreMode::Running => {
                if self.cores[core].gap_wake_at == Some(now) {
                    let c = &mut self.cores[core];
                    c.flush(now);
                    c.gap_wake_at = None;
                    self.continue_workload(core);
                }
            }
            // Already idled at the same instant by an overflow delivery, or
            // finished; nothing to settle.
            CoreMode::IdledByRegulator | CoreMode::Finished => {}
        }
    }

    /// Picks the core's execution back up after a handler returned or the
    /// regulator released it.
    fn resume(&mut self, core: usize) {
        let now = self.now;
        if self.cores[core].outstanding == Outstanding::InService {
            return; // completion will drive progress
        }
        debug_assert_eq!(self.cores[core].outstanding, Outstanding::None);
        if self.cores[core].needs_reissue {
            self.cores[core].needs_reissue = false;
            self.cores[core].outstanding = Outstanding::Pending;
            self.bus.request(CoreId(core), now);
            self.schedule_arbitration();
            return;
        }
        if let Some(left) = self.cores[core].gap_left.take() {
            if left > 0 {
                let c = &mut self.cores[core];
                c.gap_wake_at = Some(now + left);
                c.wake_gen += 1;
                let gen = c.wake_gen;
                self.schedule(now + left, EventKind::CoreWake(CoreId(core), gen));
                return;
            }
        }
        self.continue_workload(core);
    }

    /// Advances the action stream: start the next compute span, issue the
    /// next access, or declare the workload done.
    fn continue_workload(&mut self, core: usize) {
        let now = self.now;
        debug_assert_eq!(self.cores[core].mode, CoreMode::Running);
        debug_assert_eq!(self.cores[core].outstanding, Outstanding::None);
        match self.cores[core].cursor.next_action() {
            Action::Compute(ticks) => {
                debug_assert!(ticks > 0);
                let c = &mut self.cores[core];
                c.gap_wake_at = Some(now + ticks);
                c.wake_gen += 1;
                let gen = c.wake_gen;
                self.schedule(now + ticks, EventKind::CoreWake(CoreId(core), gen));
            }
            Action::MemAccess => {
                self.cores[core].outstanding = Outstanding::Pending;
                self.bus.request(CoreId(core), now);
                self.schedule_arbitration();
            }
            Action::Done => {
                self.schedule(now, EventKind::WorkloadDone(CoreId(core)));
            }
        }
    }

    fn on_workload_done(&mut self, core_id: CoreId) {
        let core = core_id.0;
        if self.cores[core].mode == CoreMode::Finished {
            return;
        }
        let now = self.now;
        let c = &mut self.cores[core];
        c.flush(now);
        c.mode = CoreMode::Finished;
        c.done_at = Some(now);
        if c.finite {
            self.finite_left -= 1;
        }
    }

    // ----- outputs ----------------------------------------------------------

    pub fn metrics(&self) -> RunMetrics {
        let mut vcpus = Vec::with_capacity(self.setup.vcpu_cores.len());
        for v in 0..self.setup.vcpu_cores.len() {
            let core = self.setup.vcpu_cores[v].0;
            let c = &self.cores[core];
            let profile = &self.setup.workloads[v];
            let reg = self.regs[v].as_ref();
            vcpus.push(VcpuMetrics {
                vcpu: VcpuId(v),
                vm: self.setup.vcpu_vms[v],
                core: CoreId(core),
                workload: profile.name.clone(),
                is_writer: profile.is_writer(),
                regulated: reg.is_some(),
                finished: c.done_at.is_some(),
                execution_time: c.done_at.unwrap_or(self.final_time),
                bus_accesses: self.vcpu_accesses[v],
                busy_ticks: c.busy_ticks,
                stall_ticks: c.stall_ticks,
                idle_ticks: c.idle_ticks,
                interrupt_ticks: c.interrupt_ticks,
                periods_elapsed: reg.map_or(0, |r| r.timer_interrupts),
                pmu_interrupts: reg.map_or(0, |r| r.pmu_interrupts),
            });
        }
        RunMetrics {
            final_time: self.final_time,
            total_events: self.events_processed,
            bus_busy_ticks: self.bus.busy_ticks,
            completed_accesses: self.bus.completed,
            vcpus,
        }
    }

    pub fn reg_state(&self, v: VcpuId) -> Option<&VcpuRegState> {
        self.regs[v.0].as_ref()
    }
}

fn event_payload(ev: Event) -> u64 {
    match ev.kind {
        EventKind::TimerTick(v) | EventKind::PmuOverflow(v) => v.0 as u64,
        EventKind::BusComplete(c) | EventKind::WorkloadDone(c) => c.0 as u64,
        EventKind::CoreWake(c, _) => c.0 as u64,
        EventKind::BusArbitrate => u64::MAX,
    }
}

/// Convenience for one VM pinned to consecutive cores; tests use it heavily.
pub fn single_vm_setup(
    bus: BusModel,
    workloads: Vec<WorkloadProfile>,
    mut spec: VmSpec,
) -> SimSetup {
    let n = workloads.len();
    spec.vcpus = (0..n).map(VcpuId).collect();
    SimSetup {
        num_cores: n,
        bus,
        vms: vec![spec],
        vcpu_cores: (0..n).map(CoreId).collect(),
        vcpu_vms: vec![VmId(0); n],
        workloads,
        max_events: DEFAULT_MAX_EVENTS,
        jitter: None,
    }
}
