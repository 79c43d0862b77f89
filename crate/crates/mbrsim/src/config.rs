//! Experiment configuration: the `section.key = value` text format, its
//! validation, and the translation into an engine setup.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment                      blank lines and '#' comments are skipped
//! platform.num_cores = 4
//! bus.service_time   = 54       # ticks per bus access
//! run.setup          = interf+mbr   # solo | interf | interf+mbr
//! run.duration_us    = 0        # 0 = run until finite workloads complete
//! run.max_events     = 1000000000
//! run.baseline       = auto     # auto | none | <workload name>
//! run.repetitions    = 1
//! run.jitter         = 0        # gap jitter amplitude, instructions
//! run.jitter_seed    = 1
//! vm.0.name          = critical
//! vm.0.cores         = 0
//! vm.0.regulated     = false
//! vm.0.workload      = susanc_small
//! vm.1.cores         = 1,2,3
//! vm.1.regulated     = true
//! vm.1.budget        = 100
//! vm.1.period_us     = 10
//! vm.1.pmu_irq       = true
//! vm.1.d_timer       = 143
//! vm.1.d_pmu         = 143
//! vm.1.custom_dist   = 0.4,0.3,0.3   # optional per-vCPU fractions
//! vm.1.workload      = saturating_writer
//! vm.1.workload.2    = qsort_small   # per-vCPU override, index within VM
//! sweep.axis         = budget   # optional: budget | period
//! sweep.values       = 50,100,1000,10000
//! ```
//!
//! Workload specs: a preset name, `saturating_writer`,
//! `intensity:<accesses_per_kilo>:<total_instructions>`, or `trace:<path>`.
//!
//! Regulation only takes effect in the `interf+mbr` setup; `interf` runs
//! the same VMs unregulated, so one file describes a whole methodology.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::bus::BusModel;
use crate::engine::{JitterSpec, SimSetup, DEFAULT_MAX_EVENTS};
use crate::errors::ConfigError;
use crate::regulator::{InterruptCosts, VmSpec, DEFAULT_D_TIMER};
use crate::types::{CoreId, SimTime, VcpuId, VmId, TICKS_PER_US};
use crate::workload::{self, WorkloadProfile};

/// Bus service time shipped with the default configs, in ticks. Set by
/// calibrating the quad-core topology against the reference interference
/// ratios; `BusModel::default()` keeps the uncalibrated 20.
pub const CALIBRATED_SERVICE_TIME: u64 = 52;

/// Default quad-core topology: one unregulated VM on core 0, one regulated
/// three-writer VM on cores 1-3.
pub const DEFAULT_NUM_CORES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setup {
    Solo,
    Interf,
    InterfMbr,
}

impl Setup {
    pub fn parse(s: &str) -> Option<Setup> {
        match s {
            "solo" => Some(Setup::Solo),
            "interf" => Some(Setup::Interf),
            "interf+mbr" => Some(Setup::InterfMbr),
            _ => None,
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Setup::Solo => "solo",
            Setup::Interf => "interf",
            Setup::InterfMbr => "interf+mbr",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaselineMode {
    /// Run the matching solo setup in-process when a ratio is needed.
    Auto,
    /// Skip ratio metrics.
    None,
    /// Load `baseline_<workload>.csv` from the output directory; error if
    /// missing.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Budget,
    Period,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmConfig {
    pub name: String,
    pub cores: Vec<usize>,
    pub regulated: bool,
    pub budget: u64,
    pub period_us: f64,
    pub custom_dist: Option<Vec<f64>>,
    pub pmu_irq: bool,
    pub d_timer: u64,
    pub d_pmu: u64,
    /// Workload for every vCPU unless overridden per index.
    pub workload: String,
    pub workload_overrides: BTreeMap<usize, String>,
}

impl VmConfig {
    fn new(name: String) -> Self {
        VmConfig {
            name,
            cores: Vec::new(),
            regulated: false,
            budget: 0,
            period_us: 10.0,
            custom_dist: None,
            pmu_irq: true,
            d_timer: DEFAULT_D_TIMER,
            d_pmu: DEFAULT_D_TIMER,
            workload: String::new(),
            workload_overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub num_cores: usize,
    pub bus: BusModel,
    pub setup: Setup,
    pub vms: Vec<VmConfig>,
    /// Simulated horizon; 0 runs until every finite workload completes.
    pub duration_us: f64,
    pub max_events: u64,
    pub baseline: BaselineMode,
    pub repetitions: u32,
    pub jitter: u64,
    pub jitter_seed: u64,
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn empty(setup: Setup) -> Self {
        ExperimentConfig {
            num_cores: DEFAULT_NUM_CORES,
            bus: BusModel {
                service_time: CALIBRATED_SERVICE_TIME,
            },
            setup,
            vms: Vec::new(),
            duration_us: 0.0,
            max_events: DEFAULT_MAX_EVENTS,
            baseline: BaselineMode::Auto,
            repetitions: 1,
            jitter: 0,
            jitter_seed: 1,
            sweep: None,
        }
    }

    /// The default evaluation topology: a critical VM running a benchmark
    /// profile on core 0, and (outside solo) a non-critical VM of three
    /// saturating writers on cores 1-3, regulated at budget 100 per 10 µs.
    pub fn default_topology(setup: Setup) -> Self {
        Self::default_topology_with(setup, "susanc_small")
    }

    pub fn default_topology_with(setup: Setup, critical_workload: &str) -> Self {
        let mut cfg = Self::empty(setup);
        let mut critical = VmConfig::new("critical".to_string());
        critical.cores = vec![0];
        critical.workload = critical_workload.to_string();
        cfg.vms.push(critical);
        if setup != Setup::Solo {
            let mut nc = VmConfig::new("writers".to_string());
            nc.cores = vec![1, 2, 3];
            nc.regulated = true;
            nc.budget = 100;
            nc.period_us = 10.0;
            nc.workload = "saturating_writer".to_string();
            cfg.vms.push(nc);
        }
        cfg
    }

    /// Overhead measurement setup: the writer VM alone, regulated, with
    /// the overflow interrupt disabled so the budget never idles a core
    /// and only the timer cost shows up.
    pub fn overhead_default() -> Self {
        let mut cfg = Self::empty(Setup::Solo);
        let mut vm = VmConfig::new("writers".to_string());
        vm.cores = vec![0, 1, 2];
        vm.regulated = true;
        vm.budget = 100;
        vm.period_us = 10.0;
        vm.pmu_irq = false;
        vm.workload = "saturating_writer".to_string();
        cfg.num_cores = 3;
        cfg.vms.push(vm);
        cfg
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::empty(Setup::Solo);
        let mut sweep_axis: Option<SweepAxis> = None;
        let mut sweep_values: Option<Vec<f64>> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ConfigError::new(
                    format!("line {line_no}"),
                    "expected 'section.key = value'",
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            let err = |msg: String| ConfigError::new(format!("line {line_no}: {key}"), msg);

            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["platform", "num_cores"] => cfg.num_cores = parse_num(value).map_err(err)?,
                ["bus", "service_time"] => {
                    cfg.bus.service_time = parse_num(value).map_err(err)?
                }
                ["run", "setup"] => {
                    cfg.setup = Setup::parse(value).ok_or_else(|| {
                        err(format!("unknown setup '{value}' (solo | interf | interf+mbr)"))
                    })?
                }
                ["run", "duration_us"] => cfg.duration_us = parse_num(value).map_err(err)?,
                ["run", "max_events"] => cfg.max_events = parse_num(value).map_err(err)?,
                ["run", "baseline"] => {
                    cfg.baseline = match value {
                        "auto" => BaselineMode::Auto,
                        "none" => BaselineMode::None,
                        other => BaselineMode::Named(other.to_string()),
                    }
                }
                ["run", "repetitions"] => cfg.repetitions = parse_num(value).map_err(err)?,
                ["run", "jitter"] => cfg.jitter = parse_num(value).map_err(err)?,
                ["run", "jitter_seed"] => cfg.jitter_seed = parse_num(value).map_err(err)?,
                ["sweep", "axis"] => {
                    sweep_axis = Some(match value {
                        "budget" => SweepAxis::Budget,
                        "period" => SweepAxis::Period,
                        other => return Err(err(format!("unknown sweep axis '{other}'"))),
                    })
                }
                ["sweep", "values"] => {
                    sweep_values = Some(parse_list(value).map_err(err)?);
                }
                ["vm", vm_idx, rest @ ..] => {
                    let i: usize = vm_idx
                        .parse()
                        .map_err(|_| err(format!("bad VM index '{vm_idx}'")))?;
                    while cfg.vms.len() <= i {
                        let n = cfg.vms.len();
                        cfg.vms.push(VmConfig::new(format!("vm{n}")));
                    }
                    let vm = &mut cfg.vms[i];
                    match rest {
                        ["name"] => vm.name = value.to_string(),
                        ["cores"] => {
                            vm.cores = parse_list::<usize>(value).map_err(err)?;
                        }
                        ["regulated"] => vm.regulated = parse_bool(value).map_err(err)?,
                        ["budget"] => vm.budget = parse_num(value).map_err(err)?,
                        ["period_us"] => vm.period_us = parse_num(value).map_err(err)?,
                        ["custom_dist"] => {
                            vm.custom_dist = Some(parse_list(value).map_err(err)?)
                        }
                        ["pmu_irq"] => vm.pmu_irq = parse_bool(value).map_err(err)?,
                        ["d_timer"] => vm.d_timer = parse_num(value).map_err(err)?,
                        ["d_pmu"] => vm.d_pmu = parse_num(value).map_err(err)?,
                        ["workload"] => vm.workload = value.to_string(),
                        ["workload", k] => {
                            let vk: usize = k
                                .parse()
                                .map_err(|_| err(format!("bad vCPU index '{k}'")))?;
                            vm.workload_overrides.insert(vk, value.to_string());
                        }
                        _ => return Err(err("unknown key".to_string())),
                    }
                }
                _ => {
                    return Err(ConfigError::new(
                        format!("line {line_no}: {key}"),
                        "unknown key",
                    ))
                }
            }
        }
        if let Some(axis) = sweep_axis {
            cfg.sweep = Some(SweepConfig {
                axis,
                values: sweep_values.unwrap_or_default(),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Whether a VM is actually regulated under the configured setup.
    /// `interf` is the explicit no-reservation comparison, so it strips
    /// regulation; `solo` honors it (that is the overhead experiment).
    pub fn effective_regulated(&self, vm: &VmConfig) -> bool {
        vm.regulated && self.setup != Setup::Interf
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_cores == 0 {
            return Err(ConfigError::new("platform.num_cores", "need at least one core"));
        }
        if self.bus.service_time == 0 {
            return Err(ConfigError::new("bus.service_time", "must be at least 1 tick"));
        }
        if self.vms.is_empty() {
            return Err(ConfigError::new("vm", "no VMs configured"));
        }
        if self.setup == Setup::Solo && self.vms.len() != 1 {
            return Err(ConfigError::new(
                "run.setup",
                format!("solo runs exactly one VM, {} configured", self.vms.len()),
            ));
        }
        let total_vcpus: usize = self.vms.iter().map(|v| v.cores.len()).sum();
        if total_vcpus > self.num_cores {
            return Err(ConfigError::new(
                "platform.num_cores",
                format!("{total_vcpus} vCPUs configured on {} cores", self.num_cores),
            ));
        }
        let mut seen = vec![false; self.num_cores];
        for (i, vm) in self.vms.iter().enumerate() {
            let path = format!("vm.{i}");
            if vm.cores.is_empty() {
                return Err(ConfigError::new(format!("{path}.cores"), "no cores assigned"));
            }
            for &c in &vm.cores {
                if c >= self.num_cores {
                    return Err(ConfigError::new(
                        format!("{path}.cores"),
                        format!("core {c} does not exist (platform has {})", self.num_cores),
                    ));
                }
                if seen[c] {
                    return Err(ConfigError::new(
                        format!("{path}.cores"),
                        format!("core {c} is assigned twice"),
                    ));
                }
                seen[c] = true;
            }
            if vm.workload.is_empty() {
                return Err(ConfigError::new(
                    format!("{path}.workload"),
                    "no workload bound",
                ));
            }
            if vm.regulated {
                ticks_of_us(vm.period_us)
                    .map_err(|m| ConfigError::new(format!("{path}.period_us"), m))?;
            }
            for &k in vm.workload_overrides.keys() {
                if k >= vm.cores.len() {
                    return Err(ConfigError::new(
                        format!("{path}.workload.{k}"),
                        format!("VM has only {} vCPUs", vm.cores.len()),
                    ));
                }
            }
        }
        if self.duration_us > 0.0 {
            ticks_of_us(self.duration_us)
                .map_err(|m| ConfigError::new("run.duration_us", m))?;
        }
        if self.repetitions == 0 {
            return Err(ConfigError::new("run.repetitions", "must be at least 1"));
        }
        if self.repetitions > 1 && self.jitter == 0 {
            return Err(ConfigError::new(
                "run.repetitions",
                "repetitions above 1 only vary results with run.jitter > 0",
            ));
        }
        Ok(())
    }

    pub fn duration(&self) -> Option<SimTime> {
        if self.duration_us > 0.0 {
            Some(SimTime(ticks_of_us(self.duration_us).expect("validated")))
        } else {
            None
        }
    }

    /// Resolves workloads and builds the engine setup. `rep` selects the
    /// jitter stream for repeated runs.
    pub fn to_sim_setup(&self, rep: u32) -> Result<SimSetup, ConfigError> {
        self.validate()?;
        let mut vms = Vec::new();
        let mut vcpu_cores = Vec::new();
        let mut vcpu_vms = Vec::new();
        let mut workloads = Vec::new();
        for (i, vm) in self.vms.iter().enumerate() {
            let path = format!("vm.{i}");
            let mut vcpus = Vec::new();
            for (k, &core) in vm.cores.iter().enumerate() {
                let vcpu = VcpuId(vcpu_cores.len());
                vcpus.push(vcpu);
                vcpu_cores.push(CoreId(core));
                vcpu_vms.push(VmId(i));
                let spec = vm.workload_overrides.get(&k).unwrap_or(&vm.workload);
                workloads.push(resolve_workload(spec, &format!("{path}.workload"))?);
            }
            let period_ticks = if vm.regulated {
                ticks_of_us(vm.period_us)
                    .map_err(|m| ConfigError::new(format!("{path}.period_us"), m))?
            } else {
                (vm.period_us * TICKS_PER_US as f64).round().max(1.0) as u64
            };
            vms.push(VmSpec {
                vm: VmId(i),
                name: vm.name.clone(),
                budget: vm.budget,
                period: SimTime(period_ticks),
                custom_dist: vm.custom_dist.clone(),
                vcpus,
                regulated: self.effective_regulated(vm),
                pmu_irq: vm.pmu_irq,
                costs: InterruptCosts {
                    d_timer: vm.d_timer,
                    d_pmu: vm.d_pmu,
                },
            });
        }
        let setup = SimSetup {
            num_cores: self.num_cores,
            bus: self.bus,
            vms,
            vcpu_cores,
            vcpu_vms,
            workloads,
            max_events: self.max_events,
            jitter: if self.jitter > 0 {
                Some(JitterSpec {
                    amplitude: self.jitter,
                    seed: self
                        .jitter_seed
                        .wrapping_add(u64::from(rep).wrapping_mul(0x9e37_79b9)),
                })
            } else {
                None
            },
        };
        setup.validate()?;
        if self.duration().is_none() {
            let any_finite = setup.workloads.iter().any(|w| w.is_finite());
            if !any_finite {
                return Err(ConfigError::new(
                    "run.duration_us",
                    "every workload is infinite; a positive duration is required",
                ));
            }
        }
        Ok(setup)
    }
}

fn resolve_workload(spec: &str, path: &str) -> Result<WorkloadProfile, ConfigError> {
    if spec == "saturating_writer" {
        return Ok(WorkloadProfile::saturating_writer());
    }
    if let Some(p) = workload::preset(spec) {
        return Ok(p);
    }
    if let Some(rest) = spec.strip_prefix("intensity:") {
        let (apk, total) = rest
            .split_once(':')
            .ok_or_else(|| ConfigError::new(path, "expected intensity:<apk>:<instructions>"))?;
        let apk: u32 = apk
            .parse()
            .map_err(|_| ConfigError::new(path, format!("bad intensity '{apk}'")))?;
        let total: u64 = total
            .parse()
            .map_err(|_| ConfigError::new(path, format!("bad instruction count '{total}'")))?;
        return WorkloadProfile::intensity(format!("intensity:{apk}:{total}"), apk, total)
            .map_err(|m| ConfigError::new(path, m));
    }
    if let Some(p) = spec.strip_prefix("trace:") {
        return workload::load_trace(p).map_err(|e| ConfigError::new(path, e.to_string()));
    }
    Err(ConfigError::new(
        path,
        format!(
            "unknown workload '{spec}' (presets: {}, or saturating_writer | intensity:.. | trace:..)",
            workload::preset_names().join(", ")
        ),
    ))
}

/// Converts a µs quantity to ticks, requiring a whole number of ticks.
pub fn ticks_of_us(us: f64) -> Result<u64, String> {
    if !us.is_finite() || us <= 0.0 {
        return Err(format!("must be positive, got {us}"));
    }
    let ticks = us * TICKS_PER_US as f64;
    if (ticks - ticks.round()).abs() > 1e-9 {
        return Err(format!("{us} us is not a whole number of ticks"));
    }
    Ok(ticks.round() as u64)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|_| format!("bad number '{s}'"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("bad boolean '{s}'")),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| format!("bad list entry '{p}'")))
        .collect()
}
