//! Shared test support: the brute-force oracle and random config
//! generation for the equivalence suites.

pub mod oracle;

use mbrsim::engine::{JitterSpec, SimSetup, DEFAULT_MAX_EVENTS};
use mbrsim::regulator::{InterruptCosts, VmSpec};
use mbrsim::types::{CoreId, SimTime, VcpuId, VmId};
use mbrsim::workload::WorkloadProfile;
use mbrsim::BusModel;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Strips fields the oracle does not model (event counts) so the rest can
/// be compared exactly.
pub fn comparable(mut m: mbrsim::RunMetrics) -> mbrsim::RunMetrics {
    m.total_events = 0;
    m
}

/// A small random platform: up to `max_cores` cores in one or two VMs with
/// mixed writer and intensity workloads. Deterministic per seed.
pub fn random_setup(seed: u64, max_cores: usize) -> SimSetup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cores = rng.gen_range(1..=max_cores);
    let two_vms = cores >= 2 && rng.gen_bool(0.5);
    let split = if two_vms { rng.gen_range(1..cores) } else { cores };

    let mut workloads = Vec::new();
    for _ in 0..cores {
        let w = match rng.gen_range(0..3) {
            0 => WorkloadProfile::saturating_writer(),
            1 => WorkloadProfile::intensity(
                "mixed",
                rng.gen_range(0..=400),
                rng.gen_range(500..=8_000),
            )
            .unwrap(),
            _ => WorkloadProfile::intensity(
                "hot",
                rng.gen_range(400..=1000),
                rng.gen_range(500..=4_000),
            )
            .unwrap(),
        };
        workloads.push(w);
    }

    let mut vms = Vec::new();
    let mut vcpu_vms = Vec::new();
    let mk_vm = |id: usize, vcpus: Vec<VcpuId>, rng: &mut ChaCha8Rng| VmSpec {
        vm: VmId(id),
        name: format!("vm{id}"),
        budget: rng.gen_range(0..=20),
        period: SimTime(rng.gen_range(1..=3) * 1000),
        custom_dist: None,
        vcpus,
        regulated: rng.gen_bool(0.7),
        pmu_irq: rng.gen_bool(0.8),
        costs: InterruptCosts {
            d_timer: rng.gen_range(0..=200),
            d_pmu: rng.gen_range(0..=200),
        },
    };
    let first: Vec<VcpuId> = (0..split).map(VcpuId).collect();
    for _ in 0..split {
        vcpu_vms.push(VmId(0));
    }
    vms.push(mk_vm(0, first, &mut rng));
    if two_vms {
        let second: Vec<VcpuId> = (split..cores).map(VcpuId).collect();
        for _ in split..cores {
            vcpu_vms.push(VmId(1));
        }
        vms.push(mk_vm(1, second, &mut rng));
    }

    SimSetup {
        num_cores: cores,
        bus: BusModel {
            service_time: rng.gen_range(1..=60),
        },
        vms,
        vcpu_cores: (0..cores).map(CoreId).collect(),
        vcpu_vms,
        workloads,
        max_events: DEFAULT_MAX_EVENTS,
        jitter: None::<JitterSpec>,
    }
}
