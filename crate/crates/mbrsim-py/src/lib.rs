//! Python bindings: the regulation formulas, the calibration search, and
//! an `Experiment` class driving whole simulator runs in-process.
//!
//! ```python
//! import mbrsim_py
//! mbrsim_py.assign_budgets(100, 3)            # [34, 33, 33]
//! e = mbrsim_py.Experiment.default("interf+mbr")
//! e.set_regulation(budget=100, period_us=10.0)
//! metrics = e.run()
//! metrics["critical_slowdown"]
//! ```

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use mbrsim::config::{ExperimentConfig, Setup};
use mbrsim::errors::HarnessError;
use mbrsim::harness as hx;
use mbrsim::regulator::{InterruptCosts, VmSpec};
use mbrsim::types::{SimTime, VcpuId, VmId};

fn harness_err(err: HarnessError) -> PyErr {
    match err {
        HarnessError::Sim(e) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Split a VM budget across vCPUs: equal shares, or by custom fractions.
/// Quotas sum exactly to the budget.
#[pyfunction]
#[pyo3(signature = (budget, num_vcpus, custom_dist=None))]
fn assign_budgets(
    budget: u64,
    num_vcpus: usize,
    custom_dist: Option<Vec<f64>>,
) -> PyResult<Vec<u64>> {
    let spec = VmSpec {
        vm: VmId(0),
        name: "vm".into(),
        budget,
        period: SimTime::from_us(10),
        custom_dist,
        vcpus: (0..num_vcpus).map(VcpuId).collect(),
        regulated: true,
        pmu_irq: true,
        costs: InterruptCosts::default(),
    };
    let quotas = mbrsim::assign_budgets(&spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(quotas.into_iter().map(|(_, q)| q).collect())
}

/// Bandwidth cap implied by the parameters: budget / period, accesses/µs.
#[pyfunction]
fn effective_bandwidth(budget: u64, period_us: f64) -> PyResult<f64> {
    if period_us <= 0.0 {
        return Err(PyValueError::new_err("period_us must be positive"));
    }
    Ok(budget as f64 / period_us)
}

/// Predicted timer overhead: d_timer / period, both in ticks.
#[pyfunction]
fn timer_overhead_model(d_timer_ticks: u64, period_ticks: u64) -> PyResult<f64> {
    if period_ticks == 0 {
        return Err(PyValueError::new_err("period_ticks must be positive"));
    }
    Ok(mbrsim::timer_overhead_model(d_timer_ticks, period_ticks))
}

/// Names of the bundled benchmark intensity profiles.
#[pyfunction]
fn preset_names() -> Vec<String> {
    mbrsim::preset_names().iter().map(|s| s.to_string()).collect()
}

/// Grid-search bus parameters against a target contended/solo ratio.
/// Returns (service_time, intensity, achieved_ratio).
#[pyfunction]
fn calibrate(target_slowdown: f64, interferers: usize) -> PyResult<(u64, u32, f64)> {
    let out = mbrsim::calibrate(target_slowdown, interferers)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((out.bus.service_time, out.intensity, out.achieved_ratio))
}

fn metrics_dict<'py>(
    py: Python<'py>,
    result: &hx::SetupResult,
) -> PyResult<Bound<'py, PyDict>> {
    let m = &result.metrics;
    let d = PyDict::new(py);
    d.set_item("final_time_ticks", m.final_time)?;
    d.set_item("total_events", m.total_events)?;
    d.set_item("bus_accesses", m.completed_accesses)?;
    d.set_item(
        "nc_throughput_per_us",
        if m.final_time > 0 && m.vcpus.iter().any(|v| v.is_writer) {
            Some(m.cacheline_write_throughput(SimTime(m.final_time)))
        } else {
            None
        },
    )?;
    d.set_item(
        "critical_slowdown",
        result.relative.first().map(|(_, r)| *r),
    )?;
    let vcpus = PyList::empty(py);
    for v in &m.vcpus {
        let vd = PyDict::new(py);
        vd.set_item("vcpu", v.vcpu.0)?;
        vd.set_item("vm", v.vm.0)?;
        vd.set_item("core", v.core.0)?;
        vd.set_item("workload", &v.workload)?;
        vd.set_item("finished", v.finished)?;
        vd.set_item("execution_time_ticks", v.execution_time)?;
        vd.set_item("bus_accesses", v.bus_accesses)?;
        vd.set_item("busy_ticks", v.busy_ticks)?;
        vd.set_item("stall_ticks", v.stall_ticks)?;
        vd.set_item("idle_ticks", v.idle_ticks)?;
        vd.set_item("interrupt_ticks", v.interrupt_ticks)?;
        vd.set_item("periods_elapsed", v.periods_elapsed)?;
        vd.set_item("pmu_interrupts", v.pmu_interrupts)?;
        vcpus.append(vd)?;
    }
    d.set_item("vcpus", vcpus)?;
    Ok(d)
}

/// A configured experiment, runnable any number of times. Identical
/// configurations produce identical metrics.
#[pyclass]
struct Experiment {
    config: ExperimentConfig,
}

#[pymethods]
impl Experiment {
    /// The built-in calibrated quad-core topology for a setup
    /// ("solo" | "interf" | "interf+mbr"), optionally with a different
    /// critical workload (a preset name, "saturating_writer",
    /// "intensity:<apk>:<instructions>", or "trace:<path>").
    #[staticmethod]
    #[pyo3(signature = (setup, critical_workload=None))]
    fn default(setup: &str, critical_workload: Option<&str>) -> PyResult<Self> {
        let setup = Setup::parse(setup)
            .ok_or_else(|| PyValueError::new_err(format!("unknown setup '{setup}'")))?;
        let config = match critical_workload {
            Some(w) => ExperimentConfig::default_topology_with(setup, w),
            None => ExperimentConfig::default_topology(setup),
        };
        config
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Experiment { config })
    }

    /// Load a `section.key = value` experiment config file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let config =
            ExperimentConfig::from_file(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Experiment { config })
    }

    /// The overhead-measurement topology: the writer VM alone, regulated,
    /// overflow interrupt disabled.
    #[staticmethod]
    fn overhead_default() -> Experiment {
        Experiment {
            config: ExperimentConfig::overhead_default(),
        }
    }

    /// Override the regulated VM's budget and/or period.
    #[pyo3(signature = (budget=None, period_us=None))]
    fn set_regulation(&mut self, budget: Option<u64>, period_us: Option<f64>) -> PyResult<()> {
        let Some(vm) = self.config.vms.iter_mut().find(|vm| vm.regulated) else {
            return Err(PyValueError::new_err("no regulated VM in this config"));
        };
        if let Some(b) = budget {
            vm.budget = b;
        }
        if let Some(p) = period_us {
            vm.period_us = p;
        }
        self.config
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Execute the experiment and return its metrics as a dict.
    fn run<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let result = hx::run_setup(&self.config, None).map_err(harness_err)?;
        metrics_dict(py, &result)
    }

    /// Budget sweep at the configured period; returns one dict per point.
    fn sweep_budget<'py>(&self, py: Python<'py>, budgets: Vec<u64>) -> PyResult<Bound<'py, PyList>> {
        let sweep = hx::sweep_budget(&self.config, &budgets).map_err(harness_err)?;
        sweep_list(py, &sweep, "budget")
    }

    /// Period sweep (µs) at the configured budget; one dict per point.
    fn sweep_period<'py>(
        &self,
        py: Python<'py>,
        periods_us: Vec<f64>,
    ) -> PyResult<Bound<'py, PyList>> {
        let sweep = hx::sweep_period(&self.config, &periods_us).map_err(harness_err)?;
        sweep_list(py, &sweep, "period_us")
    }

    /// Timer-overhead measurement (single regulated VM, overflow interrupt
    /// off): per period, the measured interrupt share next to the model.
    fn measure_overhead<'py>(
        &self,
        py: Python<'py>,
        periods_us: Vec<f64>,
    ) -> PyResult<Bound<'py, PyList>> {
        let result = hx::measure_overhead(&self.config, &periods_us).map_err(harness_err)?;
        let list = PyList::empty(py);
        for p in &result.points {
            let d = PyDict::new(py);
            d.set_item("period_us", p.period_us)?;
            d.set_item("measured", p.measured)?;
            d.set_item("model", p.model)?;
            list.append(d)?;
        }
        Ok(list)
    }

    fn __repr__(&self) -> String {
        format!(
            "Experiment(setup={}, vms={}, service_time={})",
            self.config.setup,
            self.config.vms.len(),
            self.config.bus.service_time
        )
    }
}

fn sweep_list<'py>(
    py: Python<'py>,
    sweep: &hx::SweepResult,
    x_name: &str,
) -> PyResult<Bound<'py, PyList>> {
    let list = PyList::empty(py);
    for p in &sweep.points {
        let d = PyDict::new(py);
        d.set_item(x_name, p.x)?;
        d.set_item("critical_slowdown", p.critical_slowdown)?;
        d.set_item("nc_throughput_per_us", p.nc_throughput)?;
        list.append(d)?;
    }
    Ok(list)
}

#[pymodule]
fn mbrsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CALIBRATED_SERVICE_TIME", mbrsim::CALIBRATED_SERVICE_TIME)?;
    m.add_function(wrap_pyfunction!(assign_budgets, m)?)?;
    m.add_function(wrap_pyfunction!(effective_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(timer_overhead_model, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_class::<Experiment>()?;
    Ok(())
}
