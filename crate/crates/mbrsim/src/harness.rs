//! Experiment runner: executes the evaluation setups, derives ratio
//! metrics against solo baselines, sweeps budgets and periods, measures
//! regulation overhead, and writes result files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bus::AccessRecord;
use crate::config::{ticks_of_us, BaselineMode, ExperimentConfig, Setup};
use crate::engine::{Simulation, StopCondition};
use crate::errors::{ConfigError, HarnessError};
use crate::metrics::{RegTraceRow, RunMetrics};
use crate::regulator::timer_overhead_model;
use crate::results::{
    monotone_non_decreasing, monotone_non_increasing, Figure, ResultRow, ResultSet, ResultTable,
    Value,
};
use crate::types::SimTime;

/// Periods simulated per point when measuring timer overhead.
pub const OVERHEAD_PERIODS_PER_POINT: u64 = 100;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record per-access and per-period regulator traces for dumping.
    pub record_traces: bool,
}

/// Output of [`run_setup`].
#[derive(Debug, Clone)]
pub struct SetupResult {
    pub metrics: RunMetrics,
    /// Solo companion metrics when one was run (auto baseline mode).
    pub baseline: Option<RunMetrics>,
    /// Relative execution time per finite vCPU of the run, in vCPU order,
    /// when a baseline was available.
    pub relative: Vec<(usize, f64)>,
    pub set: ResultSet,
    pub access_log: Vec<AccessRecord>,
    pub reg_trace: Vec<RegTraceRow>,
}

fn run_once(
    config: &ExperimentConfig,
    rep: u32,
    opts: RunOptions,
) -> Result<(RunMetrics, Vec<AccessRecord>, Vec<RegTraceRow>), HarnessError> {
    let setup = config.to_sim_setup(rep)?;
    let mut sim = Simulation::new(setup)?;
    if opts.record_traces {
        sim.record_accesses(true);
        sim.record_reg_trace(true);
    }
    let stop = match config.duration() {
        Some(t) => StopCondition::At(t),
        None => StopCondition::AllFiniteDone,
    };
    sim.run_until(stop)?;
    let metrics = sim.metrics();
    let access_log = std::mem::take(&mut sim.access_log().to_vec());
    let reg_trace = sim.reg_trace().to_vec();
    Ok((metrics, access_log, reg_trace))
}

/// The regulation point of a config: budget and period of the first VM
/// that is effectively regulated, or zeros.
fn regulation_point(config: &ExperimentConfig) -> (u64, f64) {
    config
        .vms
        .iter()
        .find(|vm| config.effective_regulated(vm))
        .map(|vm| (vm.budget, vm.period_us))
        .unwrap_or((0, 0.0))
}

/// Builds the solo companion of `config` for the VM at `vm_idx`: same
/// platform and bus, that VM alone, nothing regulated.
pub fn derive_solo(config: &ExperimentConfig, vm_idx: usize) -> ExperimentConfig {
    let mut solo = config.clone();
    solo.setup = Setup::Solo;
    solo.vms = vec![config.vms[vm_idx].clone()];
    solo.vms[0].regulated = false;
    solo.baseline = BaselineMode::None;
    solo.sweep = None;
    solo
}

/// Index of the VM whose finite workload the slowdown metrics track: the
/// first VM with any finite workload.
fn critical_vm(config: &ExperimentConfig) -> Option<usize> {
    config.vms.iter().position(|vm| {
        vm.workload != "saturating_writer"
            || vm
                .workload_overrides
                .values()
                .any(|w| w != "saturating_writer")
    })
}

/// Executes one setup. In auto baseline mode a non-solo run also executes
/// the critical VM's solo companion in-process to derive
/// `relative_execution_time`; named mode loads `baseline_<name>.csv` from
/// `out_dir` instead and errors when it is missing.
pub fn run_setup(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<SetupResult, HarnessError> {
    run_setup_opts(config, out_dir, RunOptions::default())
}

pub fn run_setup_opts(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    opts: RunOptions,
) -> Result<SetupResult, HarnessError> {
    config.validate()?;
    let reps = config.repetitions;

    // Baseline execution times per vCPU index of the critical VM.
    let mut baseline_exec: Option<Vec<u64>> = None;
    let mut baseline_metrics: Option<RunMetrics> = None;
    let mut baseline_table: Option<(String, ResultTable)> = None;
    let crit = critical_vm(config);

    if config.setup != Setup::Solo {
        match (&config.baseline, crit) {
            (BaselineMode::Auto, Some(vm_idx)) => {
                let solo = derive_solo(config, vm_idx);
                let (m, _, _) = run_once(&solo, 0, RunOptions::default())?;
                let name = solo.vms[0].workload.clone();
                baseline_exec = Some(m.vcpus.iter().map(|v| v.execution_time).collect());
                baseline_table = Some((name, metrics_table(&solo, &m, &[])));
                baseline_metrics = Some(m);
            }
            (BaselineMode::Named(name), _) => {
                let dir = out_dir.ok_or_else(|| HarnessError::MissingBaseline(name.clone()))?;
                let path = dir.join(format!("baseline_{name}.csv"));
                let text = fs::read_to_string(&path)
                    .map_err(|_| HarnessError::MissingBaseline(name.clone()))?;
                let table = ResultTable::parse_csv(&text)?;
                let mut exec: Vec<(usize, u64)> = table
                    .rows
                    .iter()
                    .filter(|r| r.metric == "execution_time_ticks" && r.vcpu.is_some())
                    .map(|r| {
                        (
                            r.vcpu.unwrap(),
                            match r.value {
                                Value::Int(v) => v,
                                Value::Float(v) => v as u64,
                            },
                        )
                    })
                    .collect();
                exec.sort_by_key(|(v, _)| *v);
                if exec.is_empty() {
                    return Err(HarnessError::MissingBaseline(name.clone()));
                }
                baseline_exec = Some(exec.into_iter().map(|(_, t)| t).collect());
            }
            _ => {}
        }
    }

    // Run the configured setup, averaging across repetitions when jitter
    // makes them differ. Metrics and traces come from the first repetition.
    let (metrics, access_log, reg_trace) = run_once(config, 0, opts)?;
    let mut tables: Vec<ResultTable> = Vec::new();
    for rep in 0..reps {
        let m = if rep == 0 {
            metrics.clone()
        } else {
            run_once(config, rep, RunOptions::default())?.0
        };
        let relative = relative_rows(config, &m, baseline_exec.as_deref());
        tables.push(metrics_table(config, &m, &relative));
    }
    let table = merge_tables(tables);

    let relative = match config.setup {
        // A solo run is its own baseline by definition.
        Setup::Solo => metrics
            .vcpus
            .iter()
            .filter(|v| v.finished)
            .map(|v| (v.vcpu.0, 1.0))
            .collect(),
        _ => relative_rows(config, &metrics, baseline_exec.as_deref()),
    };

    let mut summary = Vec::new();
    summary.push(format!(
        "run setup={} final_time_ticks={} bus_accesses={}",
        config.setup, metrics.final_time, metrics.completed_accesses
    ));
    for (vcpu, ratio) in &relative {
        summary.push(format!(
            "run vcpu={} workload={} relative_execution_time={:.6}",
            vcpu,
            metrics.vcpus[*vcpu].workload,
            ratio
        ));
    }

    let mut set = ResultSet {
        table,
        figures: Vec::new(),
        summary,
        baselines: Vec::new(),
    };
    // Solo runs persist themselves as baselines; auto mode persists the
    // companion it ran.
    if config.setup == Setup::Solo {
        let name = config.vms[0].workload.clone();
        baseline_table = Some((name, set.table.clone()));
    }
    if let Some((name, table)) = baseline_table {
        set.summary.push(format!("baseline_file=baseline_{name}.csv"));
        set.baselines.push((name, table));
    }

    Ok(SetupResult {
        metrics,
        baseline: baseline_metrics,
        relative,
        set,
        access_log,
        reg_trace,
    })
}

fn relative_rows(
    config: &ExperimentConfig,
    metrics: &RunMetrics,
    baseline_exec: Option<&[u64]>,
) -> Vec<(usize, f64)> {
    let Some(exec) = baseline_exec else {
        return Vec::new();
    };
    let Some(vm_idx) = critical_vm(config) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut within = 0usize;
    for v in &metrics.vcpus {
        if v.vm.0 == vm_idx {
            if let Some(base) = exec.get(within) {
                if *base > 0 && v.finished {
                    out.push((v.vcpu.0, v.execution_time as f64 / *base as f64));
                }
            }
            within += 1;
        }
    }
    out
}

/// Fixed per-vCPU metric emission order (alphabetical).
const VCPU_METRICS: &[&str] = &[
    "bus_accesses",
    "busy_ticks",
    "execution_time_ticks",
    "idle_ticks",
    "interrupt_ticks",
    "overhead_ratio",
    "periods_elapsed",
    "pmu_interrupts",
    "stall_ticks",
];

fn metrics_table(
    config: &ExperimentConfig,
    m: &RunMetrics,
    relative: &[(usize, f64)],
) -> ResultTable {
    let setup = config.setup.to_string();
    let (budget, period_us) = regulation_point(config);
    let mut rows = Vec::new();
    let row = |vm: Option<usize>, vcpu: Option<usize>, metric: &str, value: Value| ResultRow {
        setup: setup.clone(),
        vm,
        vcpu,
        budget,
        period_us,
        metric: metric.to_string(),
        value,
    };
    rows.push(row(None, None, "final_time_ticks", Value::Int(m.final_time)));
    rows.push(row(None, None, "total_events", Value::Int(m.total_events)));

    for (i, _vm) in config.vms.iter().enumerate() {
        let writers: u64 = m
            .vcpus
            .iter()
            .filter(|v| v.vm.0 == i && v.is_writer)
            .map(|v| v.bus_accesses)
            .sum();
        let has_writer = m.vcpus.iter().any(|v| v.vm.0 == i && v.is_writer);
        if has_writer && m.final_time > 0 {
            let thr = writers as f64 / SimTime(m.final_time).as_us();
            rows.push(row(Some(i), None, "nc_throughput_per_us", Value::Float(thr)));
        }
        for v in m.vcpus.iter().filter(|v| v.vm.0 == i) {
            for &name in VCPU_METRICS {
                let value = match name {
                    "bus_accesses" => Value::Int(v.bus_accesses),
                    "busy_ticks" => Value::Int(v.busy_ticks),
                    "execution_time_ticks" => Value::Int(v.execution_time),
                    "idle_ticks" => Value::Int(v.idle_ticks),
                    "interrupt_ticks" => Value::Int(v.interrupt_ticks),
                    "overhead_ratio" => Value::Float(v.overhead_ratio(m.final_time)),
                    "periods_elapsed" => Value::Int(v.periods_elapsed),
                    "pmu_interrupts" => Value::Int(v.pmu_interrupts),
                    "stall_ticks" => Value::Int(v.stall_ticks),
                    _ => unreachable!(),
                };
                rows.push(row(Some(i), Some(v.vcpu.0), name, value));
            }
            if let Some((_, ratio)) = relative.iter().find(|(idx, _)| *idx == v.vcpu.0) {
                rows.push(row(
                    Some(i),
                    Some(v.vcpu.0),
                    "relative_execution_time",
                    Value::Float(*ratio),
                ));
            }
        }
    }
    ResultTable { rows }
}

/// Averages repeated runs. A single repetition passes through untouched;
/// with jitter, every value becomes the arithmetic mean across runs.
fn merge_tables(mut tables: Vec<ResultTable>) -> ResultTable {
    if tables.len() == 1 {
        return tables.pop().unwrap();
    }
    let n = tables.len() as f64;
    let mut merged = tables[0].clone();
    for row_idx in 0..merged.rows.len() {
        let sum: f64 = tables.iter().map(|t| t.rows[row_idx].value.as_f64()).sum();
        let all_int = tables
            .iter()
            .all(|t| matches!(t.rows[row_idx].value, Value::Int(_)));
        let mean = sum / n;
        merged.rows[row_idx].value = if all_int && mean.fract() == 0.0 {
            Value::Int(mean as u64)
        } else {
            Value::Float(mean)
        };
    }
    merged
}

/// A sweep sample: x is the swept budget or period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub critical_slowdown: f64,
    pub nc_throughput: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub set: ResultSet,
    /// Solo execution time of the critical vCPU, ticks.
    pub baseline_exec: u64,
}

fn require_regulated_vm(config: &ExperimentConfig) -> Result<usize, HarnessError> {
    if config.setup != Setup::InterfMbr {
        return Err(ConfigError::new(
            "run.setup",
            format!("sweeps require the interf+mbr setup, got {}", config.setup),
        )
        .into());
    }
    config
        .vms
        .iter()
        .position(|vm| vm.regulated)
        .ok_or_else(|| ConfigError::new("vm", "no regulated VM to sweep").into())
}

fn run_sweep(
    config: &ExperimentConfig,
    fig_name: &str,
    xs: &[f64],
    mut apply: impl FnMut(&mut ExperimentConfig, f64),
) -> Result<SweepResult, HarnessError> {
    require_regulated_vm(config)?;
    if xs.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    let crit_idx = critical_vm(config)
        .ok_or_else(|| ConfigError::new("vm", "no finite workload to measure slowdown on"))?;

    // One solo baseline serves every point.
    let solo = derive_solo(config, crit_idx);
    let (solo_metrics, _, _) = run_once(&solo, 0, RunOptions::default())?;
    let baseline_exec = solo_metrics
        .vcpus
        .iter()
        .find(|v| v.finished)
        .map(|v| v.execution_time)
        .ok_or_else(|| ConfigError::new("vm", "critical workload never finished in solo"))?;
    let baseline_name = solo.vms[0].workload.clone();
    let baseline_table = metrics_table(&solo, &solo_metrics, &[]);

    let mut points = Vec::new();
    let mut table = ResultTable::default();
    for &x in xs {
        let mut cfg = config.clone();
        cfg.baseline = BaselineMode::None;
        apply(&mut cfg, x);
        cfg.validate()?;
        let (m, _, _) = run_once(&cfg, 0, RunOptions::default())?;
        let crit = m
            .vcpus
            .iter()
            .find(|v| v.vm.0 == crit_idx && v.finished)
            .ok_or_else(|| ConfigError::new("vm", "critical workload did not finish"))?;
        let slowdown = crit.execution_time as f64 / baseline_exec as f64;
        let nc = m.cacheline_write_throughput(SimTime(m.final_time));
        points.push(SweepPoint {
            x,
            critical_slowdown: slowdown,
            nc_throughput: nc,
        });
        let relative = vec![(crit.vcpu.0, slowdown)];
        table
            .rows
            .extend(metrics_table(&cfg, &m, &relative).rows);
    }

    let mut figure = Figure {
        name: fig_name.to_string(),
        rows: Vec::new(),
    };
    for p in &points {
        figure.rows.push((p.x, "critical_slowdown".into(), p.critical_slowdown));
    }
    for p in &points {
        figure.rows.push((p.x, "nc_throughput_per_us".into(), p.nc_throughput));
    }

    let slowdowns: Vec<f64> = points.iter().map(|p| p.critical_slowdown).collect();
    let ncs: Vec<f64> = points.iter().map(|p| p.nc_throughput).collect();
    let (expect, slow_ok, nc_ok) = if fig_name == "budget_sweep" {
        (
            "non_decreasing",
            monotone_non_decreasing(&slowdowns),
            monotone_non_decreasing(&ncs),
        )
    } else {
        (
            "non_increasing",
            monotone_non_increasing(&slowdowns),
            monotone_non_increasing(&ncs),
        )
    };
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let min_max = |v: &[f64]| {
        (
            v.iter().cloned().fold(f64::INFINITY, f64::min),
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let (smin, smax) = min_max(&slowdowns);
    let (nmin, nmax) = min_max(&ncs);
    let summary = vec![
        format!(
            "{fig_name} metric=critical_slowdown min={smin:.6} max={smax:.6} monotone_{expect}={}",
            verdict(slow_ok)
        ),
        format!(
            "{fig_name} metric=nc_throughput_per_us min={nmin:.6} max={nmax:.6} monotone_{expect}={}",
            verdict(nc_ok)
        ),
    ];

    let set = ResultSet {
        table,
        figures: vec![figure],
        summary,
        baselines: vec![(baseline_name, baseline_table)],
    };
    Ok(SweepResult {
        points,
        set,
        baseline_exec,
    })
}

/// Sweeps the regulated VM's budget at its configured fixed period.
pub fn sweep_budget(
    config: &ExperimentConfig,
    budgets: &[u64],
) -> Result<SweepResult, HarnessError> {
    let reg = require_regulated_vm(config)?;
    let xs: Vec<f64> = budgets.iter().map(|&b| b as f64).collect();
    run_sweep(config, "budget_sweep", &xs, |cfg, x| {
        cfg.vms[reg].budget = x as u64;
    })
}

/// Sweeps the regulated VM's period at its configured fixed budget.
pub fn sweep_period(
    config: &ExperimentConfig,
    periods_us: &[f64],
) -> Result<SweepResult, HarnessError> {
    let reg = require_regulated_vm(config)?;
    for &p in periods_us {
        ticks_of_us(p).map_err(|m| ConfigError::new("sweep.values", m))?;
    }
    run_sweep(config, "period_sweep", periods_us, |cfg, x| {
        cfg.vms[reg].period_us = x;
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadPoint {
    pub period_us: f64,
    pub measured: f64,
    pub model: f64,
}

#[derive(Debug, Clone)]
pub struct OverheadResult {
    pub points: Vec<OverheadPoint>,
    pub set: ResultSet,
}

/// Measures timer overhead across periods: a single regulated VM with the
/// overflow interrupt disabled runs for a fixed number of periods, and the
/// measured interrupt share is reported next to the d_timer/period model.
pub fn measure_overhead(
    config: &ExperimentConfig,
    periods_us: &[f64],
) -> Result<OverheadResult, HarnessError> {
    if periods_us.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    if config.vms.len() != 1 {
        return Err(ConfigError::new("vm", "overhead measurement runs a single VM").into());
    }
    if !config.vms[0].regulated {
        return Err(ConfigError::new("vm.0.regulated", "the measured VM must be regulated").into());
    }
    if config.vms[0].pmu_irq {
        return Err(ConfigError::new(
            "vm.0.pmu_irq",
            "disable the overflow interrupt so the budget never idles the VM",
        )
        .into());
    }
    let d_timer = config.vms[0].d_timer;

    let mut points = Vec::new();
    let mut table = ResultTable::default();
    for &p in periods_us {
        let period_ticks = ticks_of_us(p).map_err(|m| ConfigError::new("periods", m))?;
        let mut cfg = config.clone();
        cfg.vms[0].period_us = p;
        cfg.duration_us = p * OVERHEAD_PERIODS_PER_POINT as f64;
        cfg.validate()?;
        let (m, _, _) = run_once(&cfg, 0, RunOptions::default())?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for v in &m.vcpus {
            sum += v.overhead_ratio(m.final_time);
            n += 1;
        }
        let measured = sum / n as f64;
        let model = timer_overhead_model(d_timer, period_ticks);
        points.push(OverheadPoint {
            period_us: p,
            measured,
            model,
        });
        let mut rows = metrics_table(&cfg, &m, &[]).rows;
        rows.push(ResultRow {
            setup: cfg.setup.to_string(),
            vm: Some(0),
            vcpu: None,
            budget: cfg.vms[0].budget,
            period_us: p,
            metric: "overhead_measured".into(),
            value: Value::Float(measured),
        });
        rows.push(ResultRow {
            setup: cfg.setup.to_string(),
            vm: Some(0),
            vcpu: None,
            budget: cfg.vms[0].budget,
            period_us: p,
            metric: "overhead_model".into(),
            value: Value::Float(model),
        });
        table.rows.extend(rows);
    }

    let mut figure = Figure {
        name: "overhead".to_string(),
        rows: Vec::new(),
    };
    for p in &points {
        figure.rows.push((p.period_us, "measured".into(), p.measured));
    }
    for p in &points {
        figure.rows.push((p.period_us, "model".into(), p.model));
    }
    let summary = points
        .iter()
        .map(|p| {
            format!(
                "overhead period_us={} measured={:.6} model={:.6} delta={:.6}",
                p.period_us,
                p.measured,
                p.model,
                (p.measured - p.model).abs()
            )
        })
        .collect();

    Ok(OverheadResult {
        points,
        set: ResultSet {
            table,
            figures: vec![figure],
            summary,
            baselines: Vec::new(),
        },
    })
}

/// Writes `results.csv`, `summary.txt`, `fig_<name>.csv` per figure, and
/// `baseline_<workload>.csv` per stored baseline. Fails before creating
/// anything when the table is empty; output bytes are identical across
/// reruns of the same config.
pub fn emit_results(set: &ResultSet, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, HarnessError> {
    if set.table.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let results = dir.join("results.csv");
    fs::write(&results, set.table.to_csv())?;
    written.push(results);

    let mut summary = set.summary.join("\n");
    summary.push('\n');
    let summary_path = dir.join("summary.txt");
    fs::write(&summary_path, summary)?;
    written.push(summary_path);

    for fig in &set.figures {
        let path = dir.join(format!("fig_{}.csv", fig.name));
        fs::write(&path, fig.to_csv())?;
        written.push(path);
    }
    for (name, table) in &set.baselines {
        let path = dir.join(format!("baseline_{name}.csv"));
        fs::write(&path, table.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

/// Dumps the optional debug traces: one CSV of bus accesses, one of
/// per-period regulator rows.
pub fn dump_traces(result: &SetupResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut access = String::from("core,issue_time,grant_time,complete_time\n");
    for r in &result.access_log {
        access.push_str(&format!(
            "{},{},{},{}\n",
            r.core.0, r.issue_time, r.grant_time, r.complete_time
        ));
    }
    let access_path = dir.join("access_trace.csv");
    fs::write(&access_path, access)?;
    written.push(access_path);

    let mut reg = String::from("vcpu,period_index,accesses_used,idled\n");
    for r in &result.reg_trace {
        reg.push_str(&format!(
            "{},{},{},{}\n",
            r.vcpu.0, r.period_index, r.accesses_used, r.idled
        ));
    }
    let reg_path = dir.join("regulator_trace.csv");
    fs::write(&reg_path, reg)?;
    written.push(reg_path);
    Ok(written)
}
