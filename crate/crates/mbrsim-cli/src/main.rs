//! Experiment runner CLI.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when a
//! simulation aborts (event-limit guard).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbrsim::config::{ExperimentConfig, Setup, SweepAxis};
use mbrsim::errors::HarnessError;
use mbrsim::harness::{
    dump_traces, emit_results, measure_overhead, run_setup_opts, sweep_budget, sweep_period,
    RunOptions,
};

#[derive(Parser)]
#[command(
    name = "mbrsim",
    about = "Discrete-event simulator of VM-centric memory-bandwidth regulation",
    version
)]
struct Cli {
    /// Experiment config file (`section.key = value` format). Without it,
    /// the built-in calibrated quad-core topology is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for results, figures, and baselines.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Print per-point details while running.
    #[arg(long, global = true)]
    verbose: bool,

    /// Also dump per-access and per-period regulator traces.
    #[arg(long, global = true)]
    trace_dump: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured setup once and emit its metrics.
    Run,
    /// Sweep the regulated VM's budget at its fixed period.
    SweepBudget {
        /// Comma-separated budgets; defaults to the config's sweep values
        /// or 50,100,1000,10000.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<u64>>,
    },
    /// Sweep the regulated VM's period (µs) at its fixed budget.
    SweepPeriod {
        /// Comma-separated periods in µs; defaults to the config's sweep
        /// values or 1,10,25,100,1000.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Measure timer-interrupt overhead across regulation periods.
    Overhead {
        /// Comma-separated periods in µs; defaults to 1,2,5,10,100,1000.
        #[arg(long, value_delimiter = ',')]
        periods: Option<Vec<f64>>,
    },
    /// Grid-search bus parameters against a target interference ratio.
    Calibrate {
        #[arg(long, default_value_t = 2.3)]
        target: f64,
        #[arg(long, default_value_t = 3)]
        interferers: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                HarnessError::Sim(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(cli: &Cli, fallback: Setup) -> Result<ExperimentConfig, HarnessError> {
    match &cli.config {
        Some(path) => Ok(ExperimentConfig::from_file(path)?),
        None => Ok(ExperimentConfig::default_topology(fallback)),
    }
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.cmd {
        Cmd::Run => {
            let cfg = load_config(cli, Setup::InterfMbr)?;
            let result = run_setup_opts(
                &cfg,
                Some(&cli.out),
                RunOptions {
                    record_traces: cli.trace_dump,
                },
            )?;
            if cli.verbose {
                for v in &result.metrics.vcpus {
                    println!(
                        "vm={} vcpu={} workload={} exec={} accesses={} idle={} irq={}",
                        v.vm, v.vcpu, v.workload, v.execution_time, v.bus_accesses,
                        v.idle_ticks, v.interrupt_ticks
                    );
                }
            }
            for line in &result.set.summary {
                println!("{line}");
            }
            let written = emit_results(&result.set, &cli.out)?;
            if cli.trace_dump {
                dump_traces(&result, &cli.out)?;
            }
            println!("wrote {} file(s) to {}", written.len(), cli.out.display());
            Ok(())
        }
        Cmd::SweepBudget { values } => {
            let cfg = load_config(cli, Setup::InterfMbr)?;
            let budgets = values.clone().unwrap_or_else(|| {
                sweep_values_from(&cfg, SweepAxis::Budget)
                    .map(|v| v.iter().map(|x| *x as u64).collect())
                    .unwrap_or_else(|| vec![50, 100, 1000, 10_000])
            });
            let sweep = sweep_budget(&cfg, &budgets)?;
            report_sweep(cli, "budget", &sweep)?;
            Ok(())
        }
        Cmd::SweepPeriod { values } => {
            let cfg = load_config(cli, Setup::InterfMbr)?;
            let periods = values.clone().unwrap_or_else(|| {
                sweep_values_from(&cfg, SweepAxis::Period)
                    .unwrap_or_else(|| vec![1.0, 10.0, 25.0, 100.0, 1000.0])
            });
            let sweep = sweep_period(&cfg, &periods)?;
            report_sweep(cli, "period_us", &sweep)?;
            Ok(())
        }
        Cmd::Overhead { periods } => {
            let cfg = match &cli.config {
                Some(path) => ExperimentConfig::from_file(path)?,
                None => ExperimentConfig::overhead_default(),
            };
            let periods = periods
                .clone()
                .unwrap_or_else(|| vec![1.0, 2.0, 5.0, 10.0, 100.0, 1000.0]);
            let result = measure_overhead(&cfg, &periods)?;
            for line in &result.set.summary {
                println!("{line}");
            }
            let written = emit_results(&result.set, &cli.out)?;
            println!("wrote {} file(s) to {}", written.len(), cli.out.display());
            Ok(())
        }
        Cmd::Calibrate { target, interferers } => {
            let outcome = mbrsim::calibrate(*target, *interferers)?;
            println!(
                "calibrated: service_time={} intensity={} achieved_ratio={:.4} (target {})",
                outcome.bus.service_time, outcome.intensity, outcome.achieved_ratio, target
            );
            Ok(())
        }
    }
}

fn sweep_values_from(cfg: &ExperimentConfig, axis: SweepAxis) -> Option<Vec<f64>> {
    cfg.sweep
        .as_ref()
        .filter(|s| s.axis == axis)
        .map(|s| s.values.clone())
}

fn report_sweep(
    cli: &Cli,
    x_name: &str,
    sweep: &mbrsim::harness::SweepResult,
) -> Result<(), HarnessError> {
    if cli.verbose {
        for p in &sweep.points {
            println!(
                "{x_name}={} critical_slowdown={:.4} nc_throughput_per_us={:.4}",
                p.x, p.critical_slowdown, p.nc_throughput
            );
        }
    }
    for line in &sweep.set.summary {
        println!("{line}");
    }
    let written = emit_results(&sweep.set, &cli.out)?;
    println!("wrote {} file(s) to {}", written.len(), cli.out.display());
    Ok(())
}
