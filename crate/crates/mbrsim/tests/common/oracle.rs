//! Straight-line reference simulator.
//!
//! Steps simulated time one tick at a time and scans all state at every
//! tick, with no event queue, no wake generations, and no inline
//! chaining. Within a tick the phases run in the engine's documented
//! priority order: timer resets, overflow deliveries, the bus completion,
//! freshly raised zero-cost deliveries, handler-end settlements, compute
//! boundaries, workload completions, then one arbitration pass. Both
//! formulations must produce identical metrics; the event-driven engine is
//! checked against this one exactly, not within tolerances.

use mbrsim::engine::SimSetup;
use mbrsim::metrics::{RunMetrics, VcpuMetrics};
use mbrsim::regulator::VcpuRegState;
use mbrsim::types::{CoreId, VcpuId};
use mbrsim::workload::{Action, Cursor};

// Not every test binary uses both stop modes.
#[allow(dead_code)]
#[derive(Debug, Clone, Copy)]
pub enum OracleStop {
    At(u64),
    AllFiniteDone,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Running,
    Irq,
    Idled,
    Finished,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Out {
    None,
    Pending,
    InService,
}

struct OCore {
    vcpu: Option<usize>,
    cursor: Cursor,
    finite: bool,
    mode: Mode,
    out: Out,
    needs_reissue: bool,
    gap_wake_at: Option<u64>,
    gap_left: Option<u64>,
    handler_until: u64,
    done_at: Option<u64>,
    done_pending: bool,
    seg_start: u64,
    busy: u64,
    stall: u64,
    idle: u64,
    irq: u64,
}

impl OCore {
    fn flush(&mut self, now: u64) {
        let span = now - self.seg_start;
        self.seg_start = now;
        if span == 0 {
            return;
        }
        match self.mode {
            Mode::Finished => {}
            Mode::Irq => self.irq += span,
            Mode::Idled => self.idle += span,
            Mode::Running => {
                if self.out != Out::None {
                    self.stall += span;
                } else {
                    self.busy += span;
                }
            }
        }
    }
}

struct OBus {
    service: u64,
    pending: Vec<bool>,
    in_service: Option<(usize, u64)>, // core, complete_at
    rr_next: usize,
    busy: u64,
    completed: u64,
}

pub struct Oracle {
    setup: SimSetup,
    cores: Vec<OCore>,
    bus: OBus,
    regs: Vec<Option<VcpuRegState>>,
    delivery_at: Vec<Option<u64>>,
    accesses: Vec<u64>,
    finite_left: usize,
    final_time: u64,
}

impl Oracle {
    pub fn new(setup: SimSetup) -> Self {
        setup.validate().expect("oracle needs a valid setup");
        let num_vcpus = setup.vcpu_cores.len();
        let mut core_vcpu: Vec<Option<usize>> = vec![None; setup.num_cores];
        for (v, c) in setup.vcpu_cores.iter().enumerate() {
            core_vcpu[c.0] = Some(v);
        }
        let mut regs: Vec<Option<VcpuRegState>> = vec![None; num_vcpus];
        for vm in &setup.vms {
            if !vm.regulated {
                continue;
            }
            for (vcpu, quota) in mbrsim::assign_budgets(vm).expect("valid spec") {
                regs[vcpu.0] = Some(VcpuRegState::new(vcpu, quota));
            }
        }
        let cores = (0..setup.num_cores)
            .map(|c| {
                let (cursor, finite) = match core_vcpu[c] {
                    Some(v) => {
                        let p = &setup.workloads[v];
                        let jitter = setup
                            .jitter
                            .map(|j| (j.amplitude, j.seed.wrapping_add(v as u64)));
                        (Cursor::new(p, jitter), p.is_finite())
                    }
                    None => (Cursor::empty(), false),
                };
                OCore {
                    vcpu: core_vcpu[c],
                    cursor,
                    finite,
                    mode: if core_vcpu[c].is_some() {
                        Mode::Running
                    } else {
                        Mode::Finished
                    },
                    out: Out::None,
                    needs_reissue: false,
                    gap_wake_at: if core_vcpu[c].is_some() { Some(0) } else { None },
                    gap_left: None,
                    handler_until: 0,
                    done_at: None,
                    done_pending: false,
                    seg_start: 0,
                    busy: 0,
                    stall: 0,
                    idle: 0,
                    irq: 0,
                }
            })
            .collect::<Vec<_>>();
        let finite_left = cores.iter().filter(|c| c.finite).count();
        let bus = OBus {
            service: setup.bus.service_time,
            pending: vec![false; setup.num_cores],
            in_service: None,
            rr_next: 0,
            busy: 0,
            completed: 0,
        };
        Oracle {
            cores,
            bus,
            regs,
            delivery_at: vec![None; num_vcpus],
            accesses: vec![0; num_vcpus],
            finite_left,
            final_time: 0,
            setup,
        }
    }

    fn charge_handler(&mut self, core: usize, now: u64, cost: u64) {
        let c = &mut self.cores[core];
        if c.mode == Mode::Finished {
            return;
        }
        c.flush(now);
        let base = c.handler_until.max(now);
        c.handler_until = base + cost;
        match c.mode {
            Mode::Running => {
                if c.out == Out::Pending {
                    self.bus.pending[core] = false;
                    c.out = Out::None;
                    c.needs_reissue = true;
                }
                if let Some(w) = c.gap_wake_at.take() {
                    c.gap_left = Some(w - now);
                }
                c.mode = Mode::Irq;
            }
            Mode::Idled => c.mode = Mode::Irq,
            Mode::Irq | Mode::Finished => {}
        }
    }

    fn resume(&mut self, core: usize, now: u64) {
        if self.cores[core].out == Out::InService {
            return;
        }
        if self.cores[core].needs_reissue {
            self.cores[core].needs_reissue = false;
            self.cores[core].out = Out::Pending;
            self.bus.pending[core] = true;
            return;
        }
        if let Some(left) = self.cores[core].gap_left.take() {
            if left > 0 {
                self.cores[core].gap_wake_at = Some(now + left);
                return;
            }
        }
        self.continue_workload(core, now);
    }

    fn continue_workload(&mut self, core: usize, now: u64) {
        match self.cores[core].cursor.next_action() {
            Action::Compute(ticks) => {
                self.cores[core].gap_wake_at = Some(now + ticks);
            }
            Action::MemAccess => {
                self.cores[core].out = Out::Pending;
                self.bus.pending[core] = true;
            }
            Action::Done => {
                self.cores[core].done_pending = true;
            }
        }
    }

    fn deliver(&mut self, v: usize, now: u64) {
        self.delivery_at[v] = None;
        let reg = self.regs[v].as_mut().unwrap();
        reg.overflow_pending = false;
        reg.pmu_interrupts += 1;
        let core = self.setup.vcpu_cores[v].0;
        if self.cores[core].mode == Mode::Finished {
            return;
        }
        if reg.remaining == 0 {
            reg.idled = true;
            reg.idled_this_period = true;
        }
        let idled = self.regs[v].as_ref().unwrap().idled;
        if now >= self.cores[core].handler_until && self.cores[core].mode == Mode::Irq {
            self.cores[core].flush(now);
            if idled {
                self.cores[core].mode = Mode::Idled;
                if self.bus.pending[core] {
                    self.bus.pending[core] = false;
                    self.cores[core].out = Out::None;
                    self.cores[core].needs_reissue = true;
                }
            } else {
                self.cores[core].mode = Mode::Running;
                self.resume(core, now);
            }
        }
    }

    fn step(&mut self, t: u64) {
        // 1. Period boundaries, ascending vCPU order.
        for v in 0..self.regs.len() {
            let Some(reg) = self.regs[v].as_mut() else {
                continue;
            };
            let vm = &self.setup.vms[self.setup.vcpu_vms[v].0];
            let period = vm.period.ticks();
            if t == 0 || !t.is_multiple_of(period) {
                continue;
            }
            reg.on_timer_tick();
            let core = self.setup.vcpu_cores[v].0;
            let d_timer = vm.costs.d_timer;
            self.charge_handler(core, t, d_timer);
        }
        // 2. Overflow deliveries due now.
        for v in 0..self.regs.len() {
            if self.delivery_at[v] == Some(t) {
                self.deliver(v, t);
            }
        }
        // 3. The completion due now, if any.
        if let Some((core, at)) = self.bus.in_service {
            if at == t {
                self.bus.in_service = None;
                self.bus.rr_next = (core + 1) % self.setup.num_cores;
                self.bus.busy += self.bus.service;
                self.bus.completed += 1;
                self.cores[core].flush(t);
                self.cores[core].out = Out::None;
                if let Some(v) = self.cores[core].vcpu {
                    self.accesses[v] += 1;
                    if let Some(reg) = self.regs[v].as_mut() {
                        let vm = &self.setup.vms[self.setup.vcpu_vms[v].0];
                        if reg.on_access_retired(vm.pmu_irq) {
                            reg.overflow_pending = true;
                            let d_pmu = vm.costs.d_pmu;
                            self.charge_handler(core, t, d_pmu);
                            self.delivery_at[v] = Some(self.cores[core].handler_until);
                        }
                    }
                }
                if self.cores[core].mode == Mode::Running {
                    self.continue_workload(core, t);
                } else if self.cores[core].cursor.peek_done() {
                    self.cores[core].done_pending = true;
                }
            }
        }
        // 3b. A zero-cost overflow raised by this tick's completion.
        for v in 0..self.regs.len() {
            if self.delivery_at[v] == Some(t) {
                self.deliver(v, t);
            }
        }
        // 4. Handler-end settlements.
        for core in 0..self.cores.len() {
            if self.cores[core].mode == Mode::Irq && self.cores[core].handler_until == t {
                let idled = self.cores[core]
                    .vcpu
                    .and_then(|v| self.regs[v].as_ref())
                    .is_some_and(|r| r.idled);
                self.cores[core].flush(t);
                if idled {
                    self.cores[core].mode = Mode::Idled;
                } else {
                    self.cores[core].mode = Mode::Running;
                    self.resume(core, t);
                }
            }
        }
        // 5. Compute-span boundaries.
        for core in 0..self.cores.len() {
            if self.cores[core].mode == Mode::Running
                && self.cores[core].gap_wake_at == Some(t)
            {
                self.cores[core].flush(t);
                self.cores[core].gap_wake_at = None;
                self.continue_workload(core, t);
            }
        }
        // 6. Workload completions.
        for core in 0..self.cores.len() {
            if self.cores[core].done_pending {
                self.cores[core].done_pending = false;
                if self.cores[core].mode != Mode::Finished {
                    self.cores[core].flush(t);
                    self.cores[core].mode = Mode::Finished;
                    self.cores[core].done_at = Some(t);
                    if self.cores[core].finite {
                        self.finite_left -= 1;
                    }
                }
            }
        }
        // 7. One arbitration pass across everything issued this tick.
        if self.bus.in_service.is_none() {
            let n = self.setup.num_cores;
            for off in 0..n {
                let c = (self.bus.rr_next + off) % n;
                if self.bus.pending[c] {
                    self.bus.pending[c] = false;
                    self.cores[c].out = Out::InService;
                    self.bus.in_service = Some((c, t + self.bus.service));
                    break;
                }
            }
        }
    }

    pub fn run(&mut self, stop: OracleStop) -> u64 {
        let limit = match stop {
            OracleStop::At(t) => t,
            OracleStop::AllFiniteDone => u64::MAX,
        };
        if matches!(stop, OracleStop::AllFiniteDone) && self.finite_left == 0 {
            self.finalize(0);
            return 0;
        }
        let mut t = 0u64;
        loop {
            self.step(t);
            if matches!(stop, OracleStop::AllFiniteDone) && self.finite_left == 0 {
                break;
            }
            if t >= limit {
                break;
            }
            t += 1;
            assert!(t < 100_000_000, "oracle run exceeds the test horizon");
        }
        self.finalize(t);
        t
    }

    fn finalize(&mut self, end: u64) {
        self.final_time = end;
        for c in &mut self.cores {
            c.flush(end);
        }
    }

    pub fn metrics(&self) -> RunMetrics {
        let mut vcpus = Vec::new();
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
                bus_accesses: self.accesses[v],
                busy_ticks: c.busy,
                stall_ticks: c.stall,
                idle_ticks: c.idle,
                interrupt_ticks: c.irq,
                periods_elapsed: reg.map_or(0, |r| r.timer_interrupts),
                pmu_interrupts: reg.map_or(0, |r| r.pmu_interrupts),
            });
        }
        RunMetrics {
            final_time: self.final_time,
            total_events: 0,
            bus_busy_ticks: self.bus.busy,
            completed_accesses: self.bus.completed,
            vcpus,
        }
    }
}

/// Convenience wrapper: run the oracle over a setup.
pub fn run_oracle(setup: &SimSetup, stop: OracleStop) -> RunMetrics {
    let mut o = Oracle::new(setup.clone());
    o.run(stop);
    o.metrics()
}
