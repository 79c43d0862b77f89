//! Budget regulation: per-VM parameters, the quota split across vCPUs, and
//! the per-vCPU accounting that the timer and overflow paths drive.
//!
//! Regulation is VM-centric: budgets and periods are declared per VM and
//! fixed at configuration time, while enforcement (counting, idling,
//! resuming) happens per vCPU on its pinned core.

use crate::errors::ConfigError;
use crate::types::{SimTime, VcpuId, VmId};

/// Default interrupt handling cost in ticks: injection latency plus
/// callback execution time.
pub const DEFAULT_D_TIMER: u64 = 143;

/// Slack allowed on the sum of a custom distribution's fractions.
const DIST_SUM_SLACK: f64 = 1e-6;

/// Interrupt handling costs. `d_pmu` defaults to `d_timer`; only the timer
/// path has a separately quantified cost, but the knob exists so the
/// assumption can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterruptCosts {
    pub d_timer: u64,
    pub d_pmu: u64,
}

impl Default for InterruptCosts {
    fn default() -> Self {
        InterruptCosts {
            d_timer: DEFAULT_D_TIMER,
            d_pmu: DEFAULT_D_TIMER,
        }
    }
}

/// A VM's regulation parameters and vCPU set, fixed at configuration time.
#[derive(Debug, Clone, PartialEq)]
pub struct VmSpec {
    pub vm: VmId,
    pub name: String,
    /// Bus accesses the VM may retire per period, distributed to its vCPUs.
    pub budget: u64,
    /// Regulation period: budgets reset and idled cores resume here.
    pub period: SimTime,
    /// Optional per-vCPU budget fractions; equal split when absent.
    pub custom_dist: Option<Vec<f64>>,
    pub vcpus: Vec<VcpuId>,
    pub regulated: bool,
    /// Whether the overflow interrupt is delivered. When disabled the
    /// counter still runs but no core is ever idled.
    pub pmu_irq: bool,
    pub costs: InterruptCosts,
}

impl VmSpec {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if self.vcpus.is_empty() {
            return Err(ConfigError::new(
                format!("{path}.cores"),
                "a VM needs at least one vCPU",
            ));
        }
        if self.regulated && self.period.ticks() == 0 {
            return Err(ConfigError::new(
                format!("{path}.period_us"),
                "regulation period must be positive",
            ));
        }
        if let Some(dist) = &self.custom_dist {
            if dist.len() != self.vcpus.len() {
                return Err(ConfigError::new(
                    format!("{path}.custom_dist"),
                    format!(
                        "distribution has {} entries but the VM has {} vCPUs",
                        dist.len(),
                        self.vcpus.len()
                    ),
                ));
            }
            for (i, f) in dist.iter().enumerate() {
                if !(0.0..=1.0).contains(f) {
                    return Err(ConfigError::new(
                        format!("{path}.custom_dist"),
                        format!("fraction {i} is {f}, outside [0, 1]"),
                    ));
                }
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > DIST_SUM_SLACK {
                return Err(ConfigError::new(
                    format!("{path}.custom_dist"),
                    format!("fractions sum to {sum}, expected 1"),
                ));
            }
        }
        Ok(())
    }

    /// Bandwidth cap implied by the parameters: budget / period, in
    /// accesses per microsecond. A zero budget fully throttles the VM
    /// after its first period.
    pub fn effective_bandwidth(&self) -> f64 {
        assert!(self.period.ticks() > 0, "period must be positive");
        self.budget as f64 / self.period.as_us()
    }
}

/// Splits a VM budget across its vCPUs.
///
/// Equal split assigns `floor(budget / n)` each; a custom distribution
/// assigns `floor(budget * fraction)`. Leftover accesses are handed out
/// one at a time by largest fractional remainder, ties to the lowest vCPU
/// id. Quotas therefore always sum to the VM budget and no quota is a full
/// access away from its exact real-valued share.
pub fn assign_budgets(spec: &VmSpec) -> Result<Vec<(VcpuId, u64)>, ConfigError> {
    let path = format!("vm.{}", spec.vm.0);
    spec.validate(&path)?;
    let n = spec.vcpus.len();

    let mut quotas: Vec<u64>;
    match &spec.custom_dist {
        None => {
            // Integer path: every remainder tie goes to the lowest id.
            let base = spec.budget / n as u64;
            let extra = (spec.budget % n as u64) as usize;
            quotas = (0..n).map(|i| base + u64::from(i < extra)).collect();
        }
        Some(dist) => {
            let shares: Vec<f64> = dist.iter().map(|f| spec.budget as f64 * f).collect();
            quotas = shares.iter().map(|s| s.floor() as u64).collect();
            let fracs: Vec<f64> = shares
                .iter()
                .zip(&quotas)
                .map(|(s, q)| s - *q as f64)
                .collect();
            let assigned: u64 = quotas.iter().sum();
            let leftover = spec.budget.saturating_sub(assigned) as usize;
            if leftover > n {
                return Err(ConfigError::new(
                    format!("{path}.custom_dist"),
                    "fractions leave more remainder accesses than vCPUs",
                ));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                fracs[b]
                    .partial_cmp(&fracs[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            for &i in order.iter().take(leftover) {
                quotas[i] += 1;
            }
        }
    }
    debug_assert_eq!(quotas.iter().sum::<u64>(), spec.budget);
    Ok(spec.vcpus.iter().copied().zip(quotas).collect())
}

/// Predicted fraction of core time consumed by the periodic timer
/// interrupt: handler cost over period, both in ticks.
pub fn timer_overhead_model(d_timer: u64, period_ticks: u64) -> f64 {
    assert!(period_ticks > 0, "period must be positive");
    d_timer as f64 / period_ticks as f64
}

/// Live regulation state for one vCPU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcpuRegState {
    pub vcpu: VcpuId,
    /// Accesses allowed per period, from [`assign_budgets`].
    pub quota: u64,
    /// Accesses left this period; never exceeds the quota.
    pub remaining: u64,
    /// Regulator intent: the core stays frozen until a timer clears this.
    pub idled: bool,
    /// An overflow has been raised and not yet delivered.
    pub overflow_pending: bool,
    pub timer_interrupts: u64,
    pub pmu_interrupts: u64,
    pub period_index: u64,
    pub accesses_this_period: u64,
    pub idled_this_period: bool,
}

impl VcpuRegState {
    pub fn new(vcpu: VcpuId, quota: u64) -> Self {
        VcpuRegState {
            vcpu,
            quota,
            remaining: quota,
            idled: false,
            overflow_pending: false,
            timer_interrupts: 0,
            pmu_interrupts: 0,
            period_index: 0,
            accesses_this_period: 0,
            idled_this_period: false,
        }
    }

    /// Period boundary: reset the budget and release the idle latch when
    /// the quota allows forward progress. A zero-quota vCPU stays idled;
    /// waking it would only buy one over-budget access per period.
    /// Returns whether the core should resume from idle.
    pub fn on_timer_tick(&mut self) -> bool {
        self.timer_interrupts += 1;
        self.period_index += 1;
        self.remaining = self.quota;
        self.accesses_this_period = 0;
        let resume = self.idled && self.quota > 0;
        if resume {
            self.idled = false;
        }
        self.idled_this_period = self.idled;
        resume
    }

    /// One access retired on the bus. Returns true when an overflow
    /// interrupt should be raised: the budget just ran out (or was already
    /// exhausted, for zero quotas) and no overflow is in flight.
    pub fn on_access_retired(&mut self, pmu_irq_enabled: bool) -> bool {
        self.accesses_this_period += 1;
        self.remaining = self.remaining.saturating_sub(1);
        pmu_irq_enabled && self.remaining == 0 && !self.overflow_pending && !self.idled
    }
}
