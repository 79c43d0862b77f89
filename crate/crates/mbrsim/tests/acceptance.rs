//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `--nocapture` to see them). Tolerances are pinned in the
//! asserts; nothing is deferred to later calibration.

mod common;

use common::oracle::{run_oracle, OracleStop};
use common::{comparable, random_setup};
use mbrsim::config::{BaselineMode, ExperimentConfig, Setup};
use mbrsim::engine::{single_vm_setup, Simulation, StopCondition};
use mbrsim::harness::{measure_overhead, run_setup, sweep_budget, sweep_period};
use mbrsim::regulator::{assign_budgets, InterruptCosts, VmSpec};
use mbrsim::types::{SimTime, VcpuId, VmId};
use mbrsim::workload::WorkloadProfile;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vm_spec(budget: u64, n: usize, dist: Option<Vec<f64>>) -> VmSpec {
    VmSpec {
        vm: VmId(0),
        name: "vm".into(),
        budget,
        period: SimTime::from_us(10),
        custom_dist: dist,
        vcpus: (0..n).map(VcpuId).collect(),
        regulated: true,
        pmu_irq: true,
        costs: InterruptCosts::default(),
    }
}

#[test]
fn acceptance_1_budget_assignment_exactness() {
    // Equal split: exhaustive over budgets and vCPU counts.
    for budget in 0..=1000u64 {
        for n in 1..=8usize {
            let quotas = assign_budgets(&vm_spec(budget, n, None)).unwrap();
            let sum: u64 = quotas.iter().map(|(_, q)| q).sum();
            assert_eq!(sum, budget, "budget {budget} over {n} vCPUs");
            let exact = budget as f64 / n as f64;
            for (v, q) in &quotas {
                assert!(
                    (*q as f64 - exact).abs() < 1.0,
                    "budget {budget}, {n} vCPUs: quota {q} for {v} vs exact {exact}"
                );
            }
        }
    }
    // Custom distributions: random fractions, normalized.
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11);
    for case in 0..200 {
        let n = rng.gen_range(1..=8usize);
        let budget = rng.gen_range(0..=1000u64);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let dist: Vec<f64> = raw.iter().map(|f| f / total).collect();
        let quotas = assign_budgets(&vm_spec(budget, n, Some(dist.clone()))).unwrap();
        let sum: u64 = quotas.iter().map(|(_, q)| q).sum();
        assert_eq!(sum, budget, "case {case}");
        for (i, (_, q)) in quotas.iter().enumerate() {
            let exact = budget as f64 * dist[i];
            assert!(
                (*q as f64 - exact).abs() < 1.0,
                "case {case}: quota {q} vs exact {exact}"
            );
        }
    }
    println!("acceptance 1 (budget assignment exactness): PASS");
}

#[test]
fn acceptance_2_budget_ceiling_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCE11);
    for case in 0..100 {
        let cores = rng.gen_range(1..=4usize);
        let period_us = rng.gen_range(1..=3u64);
        let periods = rng.gen_range(5..=50u64);
        let mut workloads = Vec::new();
        for _ in 0..cores {
            workloads.push(if rng.gen_bool(0.6) {
                WorkloadProfile::saturating_writer()
            } else {
                WorkloadProfile::intensity("w", rng.gen_range(100..=1000), 10_000_000).unwrap()
            });
        }
        let spec = VmSpec {
            budget: rng.gen_range(0..=15),
            period: SimTime::from_us(period_us),
            costs: InterruptCosts {
                d_timer: rng.gen_range(0..=150),
                d_pmu: rng.gen_range(0..=150),
            },
            ..vm_spec(0, cores, None)
        };
        let quotas: Vec<u64> = assign_budgets(&spec).unwrap().iter().map(|(_, q)| *q).collect();
        let setup = single_vm_setup(
            mbrsim::BusModel {
                service_time: rng.gen_range(5..=60),
            },
            workloads,
            spec,
        );
        let period_ticks = period_us * 1000;
        let mut sim = Simulation::new(setup).unwrap();
        sim.record_accesses(true);
        sim.run_until(StopCondition::At(SimTime(periods * period_ticks)))
            .unwrap();
        // Retirements per vCPU per period window; the window of an access
        // completing exactly on a boundary is the new period, matching the
        // reset-before-charge tie-break.
        let mut counts = vec![vec![0u64; (periods + 1) as usize]; cores];
        for rec in sim.access_log() {
            let window = (rec.complete_time / period_ticks) as usize;
            counts[rec.core.0][window] += 1;
        }
        for v in 0..cores {
            for (w, &count) in counts[v].iter().enumerate() {
                assert!(
                    count <= quotas[v] + 1,
                    "case {case}: vcpu {v} retired {count} in period {w}, quota {}",
                    quotas[v]
                );
            }
        }
    }
    println!("acceptance 2 (budget ceiling quota+1): PASS");
}

#[test]
fn acceptance_3_overhead_law() {
    let cfg = ExperimentConfig::overhead_default();
    let periods = [1.0, 2.0, 5.0, 10.0, 100.0, 1000.0];
    let result = measure_overhead(&cfg, &periods).unwrap();
    for p in &result.points {
        let duration = p.period_us * 1000.0 * mbrsim::harness::OVERHEAD_PERIODS_PER_POINT as f64;
        let one_interrupt = 143.0 / duration;
        assert!(
            (p.measured - p.model).abs() <= one_interrupt + 1e-12,
            "period {} us: measured {} vs model {} exceeds one-interrupt rounding {}",
            p.period_us,
            p.measured,
            p.model,
            one_interrupt
        );
    }
    let at_1us = result.points[0];
    assert!(
        (at_1us.measured - 0.143).abs() <= 0.005,
        "1 us point: measured {} not within 0.5 pp of 14.3%",
        at_1us.measured
    );
    println!("acceptance 3 (timer overhead law): PASS");
}

#[test]
fn acceptance_4_interference_calibration() {
    let outcome = mbrsim::calibrate(2.3, 3).expect("calibration reaches 2.3x");
    assert!(
        (outcome.achieved_ratio - 2.3).abs() <= 0.23,
        "grid best {} outside 2.3 +/- 10%",
        outcome.achieved_ratio
    );
    // Re-verify the returned parameters on the full-length profile.
    let verified = mbrsim::calibrate::interference_ratio_n(
        outcome.bus.service_time,
        outcome.intensity,
        3,
        200_000,
    );
    assert!(
        (verified - 2.3).abs() <= 0.23,
        "verification ratio {verified} outside 2.3 +/- 10%"
    );
    // The shipped defaults also sit inside the window.
    let interf = run_setup(&ExperimentConfig::default_topology(Setup::Interf), None).unwrap();
    let kappa = interf.relative[0].1;
    assert!(
        (kappa - 2.3).abs() <= 0.23,
        "default-config interf/solo ratio {kappa} outside 2.3 +/- 10%"
    );
    println!(
        "acceptance 4 (interference calibration): PASS (grid {:.3}, defaults {:.3})",
        outcome.achieved_ratio, kappa
    );
}

#[test]
fn acceptance_5_sweep_trend_reproduction() {
    let cfg = ExperimentConfig::default_topology(Setup::InterfMbr);

    // (a) Budget sweep at a fixed 10 us period.
    let budgets = [50u64, 100, 1000, 10_000];
    let bs = sweep_budget(&cfg, &budgets).unwrap();
    let slow: Vec<f64> = bs.points.iter().map(|p| p.critical_slowdown).collect();
    for w in slow.windows(2) {
        assert!(
            w[1] >= w[0] * (1.0 - 1e-9),
            "budget sweep slowdown not non-decreasing: {slow:?}"
        );
    }
    let at_100 = bs.points[1].critical_slowdown;
    assert!(
        (at_100 - 1.45).abs() <= 1.45 * 0.15,
        "budget 100 @ 10 us slowdown {at_100} outside 1.45x +/- 15%"
    );

    // (b) Period sweep at a fixed budget of 100.
    let periods = [1.0, 10.0, 25.0, 100.0, 1000.0];
    let ps = sweep_period(&cfg, &periods).unwrap();
    let slow: Vec<f64> = ps.points.iter().map(|p| p.critical_slowdown).collect();
    for w in slow.windows(2) {
        assert!(
            w[1] <= w[0] * (1.0 + 1e-9),
            "period sweep slowdown not non-increasing: {slow:?}"
        );
    }
    let at_1us = ps.points[0].critical_slowdown;
    assert!(
        (at_1us - 1.78).abs() <= 1.78 * 0.15,
        "1 us @ budget 100 slowdown {at_1us} outside 1.78x +/- 15%"
    );
    let at_1000us = ps.points[4].critical_slowdown;
    assert!(
        at_1000us <= 1.05,
        "1000 us @ budget 100 slowdown {at_1000us} not within 5% of solo"
    );

    // (c) Non-critical throughput ratio, 25 us vs 1 us at budget 100.
    let ratio = ps.points[2].nc_throughput / ps.points[0].nc_throughput;
    let target = 1.0 / 2.6;
    assert!(
        (ratio - target).abs() <= target * 0.20,
        "NC throughput ratio 25us/1us = {ratio} outside 1/2.6 +/- 20%"
    );

    println!(
        "acceptance 5 (sweep trends): PASS (budget100 {at_100:.3}, 1us {at_1us:.3}, \
         1000us {at_1000us:.4}, nc ratio {ratio:.4})"
    );
}

#[test]
fn acceptance_6_critical_vm_non_interference() {
    let solo = run_setup(&ExperimentConfig::default_topology(Setup::Solo), None).unwrap();
    let solo_exec = solo.metrics.vcpus[0].execution_time;

    for budget in [0u64, 50, 100, 1000] {
        for period_us in [1.0, 10.0, 100.0] {
            let mut cfg = ExperimentConfig::default_topology(Setup::InterfMbr);
            cfg.vms[1].budget = budget;
            cfg.vms[1].period_us = period_us;
            cfg.baseline = BaselineMode::None;
            let r = run_setup(&cfg, None).unwrap();
            let crit = &r.metrics.vcpus[0];
            assert_eq!(
                crit.interrupt_ticks, 0,
                "critical vCPU charged interrupt ticks at budget={budget} period={period_us}"
            );
            assert_eq!(crit.periods_elapsed, 0);
            if budget == 0 {
                let deviation = (crit.execution_time as f64 - solo_exec as f64).abs()
                    / solo_exec as f64;
                assert!(
                    deviation <= 0.002,
                    "budget 0 @ {period_us} us: deviation {deviation} above 0.2%"
                );
            }
        }
    }
    println!("acceptance 6 (critical-VM non-interference): PASS");
}

#[test]
fn acceptance_7_benchmark_sensitivity_ordering() {
    // NC throughput at a fixed generous regulation point, alongside each
    // benchmark profile. Ordering follows the profiles' memory intensity;
    // adjacent mid-class profiles may tie.
    let order = [
        "basicmath_small",
        "qsort_small",
        "bitcount_small",
        "susans_small",
        "susane_small",
    ];
    let mut nc = Vec::new();
    for name in order {
        let mut cfg = ExperimentConfig::default_topology_with(Setup::InterfMbr, name);
        cfg.vms[1].budget = 10_000;
        cfg.vms[1].period_us = 10.0;
        cfg.baseline = BaselineMode::None;
        let r = run_setup(&cfg, None).unwrap();
        let thr = r
            .metrics
            .cacheline_write_throughput(SimTime(r.metrics.final_time));
        nc.push((name, thr));
    }
    for w in nc.windows(2) {
        assert!(
            w[0].1 >= w[1].1 * 0.98,
            "NC throughput ordering broken: {:?} < {:?}",
            w[0],
            w[1]
        );
    }
    assert!(
        nc[0].1 > nc[4].1 * 1.05,
        "basicmath should leave clearly more bandwidth than susan-e: {nc:?}"
    );
    println!("acceptance 7 (sensitivity ordering): PASS ({nc:?})");
}

#[test]
fn acceptance_8_determinism_and_oracle_equivalence() {
    for seed in 500..520u64 {
        let setup = random_setup(seed, 4);
        let horizon = 3_000 + (seed % 5) * 2_000;

        let run = || {
            let mut sim = Simulation::new(setup.clone()).unwrap();
            sim.record_events(true);
            sim.run_until(StopCondition::At(SimTime(horizon))).unwrap();
            (sim.metrics(), sim.event_log().to_vec())
        };
        let (m1, log1) = run();
        let (m2, log2) = run();
        assert_eq!(m1, m2, "seed {seed}: rerun metrics differ");
        assert_eq!(log1, log2, "seed {seed}: rerun event logs differ");

        let oracle = run_oracle(&setup, OracleStop::At(horizon));
        assert_eq!(
            comparable(m1),
            comparable(oracle),
            "seed {seed}: engine and brute-force oracle disagree"
        );
    }
    println!("acceptance 8 (determinism and oracle equivalence): PASS");
}
