//! Property suites over the queue ordering, the budget split, and workload
//! monotonicity.

use mbrsim::engine::{single_vm_setup, Simulation, StopCondition};
use mbrsim::event::{EventKind, EventQueue};
use mbrsim::regulator::{assign_budgets, InterruptCosts, VmSpec};
use mbrsim::types::{CoreId, SimTime, VcpuId, VmId};
use mbrsim::workload::WorkloadProfile;
use mbrsim::BusModel;
use proptest::prelude::*;

fn kind_of(tag: u8, id: usize) -> EventKind {
    match tag % 5 {
        0 => EventKind::TimerTick(VcpuId(id)),
        1 => EventKind::PmuOverflow(VcpuId(id)),
        2 => EventKind::BusComplete(CoreId(id)),
        3 => EventKind::CoreWake(CoreId(id), 0),
        _ => EventKind::WorkloadDone(CoreId(id)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn queue_dispatch_order_is_the_documented_total_order(
        entries in prop::collection::vec((0u64..50, 0u8..5, 0usize..4), 1..40)
    ) {
        let mut q = EventQueue::new();
        for (t, tag, id) in &entries {
            q.schedule(SimTime::ZERO, SimTime(*t), kind_of(*tag, *id));
        }
        let mut popped = Vec::new();
        while let Some(ev) = q.pop() {
            popped.push((ev.time.ticks(), ev.kind.priority(), ev.seq));
        }
        let mut sorted = popped.clone();
        sorted.sort();
        prop_assert_eq!(popped, sorted);
    }

    #[test]
    fn budget_split_is_exact_for_any_distribution(
        budget in 0u64..5000,
        raw in prop::collection::vec(0.01f64..1.0, 1..8)
    ) {
        let total: f64 = raw.iter().sum();
        let dist: Vec<f64> = raw.iter().map(|f| f / total).collect();
        let n = dist.len();
        let spec = VmSpec {
            vm: VmId(0),
            name: "vm".into(),
            budget,
            period: SimTime::from_us(10),
            custom_dist: Some(dist.clone()),
            vcpus: (0..n).map(VcpuId).collect(),
            regulated: true,
            pmu_irq: true,
            costs: InterruptCosts::default(),
        };
        let quotas = assign_budgets(&spec).unwrap();
        prop_assert_eq!(quotas.iter().map(|(_, q)| q).sum::<u64>(), budget);
        for (i, (_, q)) in quotas.iter().enumerate() {
            prop_assert!((*q as f64 - budget as f64 * dist[i]).abs() < 1.0);
        }
    }

    #[test]
    fn higher_intensity_never_finishes_earlier(
        apk_low in 0u32..=1000,
        bump in 0u32..=500,
        writers in 0usize..=2,
    ) {
        let apk_high = (apk_low + bump).min(1000);
        let exec_time = |apk: u32| {
            let mut workloads =
                vec![WorkloadProfile::intensity("probe", apk, 3_000).unwrap()];
            for _ in 0..writers {
                workloads.push(WorkloadProfile::saturating_writer());
            }
            let n = workloads.len();
            let vm = VmSpec {
                vm: VmId(0),
                name: "vm".into(),
                budget: 0,
                period: SimTime::from_us(10),
                custom_dist: None,
                vcpus: (0..n).map(VcpuId).collect(),
                regulated: false,
                pmu_irq: false,
                costs: InterruptCosts::default(),
            };
            let setup = single_vm_setup(BusModel { service_time: 20 }, workloads, vm);
            let mut sim = Simulation::new(setup).unwrap();
            sim.run_until(StopCondition::AllFiniteDone).unwrap();
            sim.metrics().vcpus[0].execution_time
        };
        prop_assert!(exec_time(apk_high) >= exec_time(apk_low));
    }
}
