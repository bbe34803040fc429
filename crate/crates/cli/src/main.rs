//! `eva`: batch simulations, provisioning benchmarks, trace generation and exact packing.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use eva_core::baselines::{
    exact_min_cost, no_packing_schedule, validate_ilp_solution, IlpInstance, OracleOptions,
    DEFAULT_ORACLE_CAP,
};
use eva_core::colocation::DEFAULT_PAIRWISE_THROUGHPUT;
use eva_core::experiments::{full_reconfiguration_rp, provision_bench, ProvisionBenchParams};
use eva_core::scheduler::{SchedulerKind, SchedulerParams, DEFAULT_PERIOD_S};
use eva_core::sim::{
    generate_trace, run_simulation, DelayModel, DurationModel, GroundTruthInterference, SimConfig,
    Simulation, Trace, TraceParams,
};
use eva_core::workloads::{cloud_catalog, worked_example_catalog};
use eva_core::{Catalog, ClusterConfiguration, Error, Task};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "eva",
    version,
    about = "Cost-efficient cluster scheduling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scheduler on a trace and write a JSON report.
    Simulate(SimulateArgs),
    /// Compare No-Packing, Full Reconfiguration and the exact oracle on random task sets.
    ProvisionBench(BenchArgs),
    /// Generate a synthetic trace as CSV.
    GenTrace(GenTraceArgs),
    /// Exact minimum-cost packing of every task in a trace.
    Solve(SolveArgs),
    /// Write a built-in instance catalog as CSV.
    DumpCatalog(DumpCatalogArgs),
}

#[derive(Args)]
struct CatalogArg {
    /// Instance catalog CSV (type_id,gpu,cpu,ram_gb,hourly_cost); defaults to the built-in cloud catalog.
    #[arg(long, env = "EVA_CATALOG")]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Trace CSV as written by gen-trace.
    #[arg(long, env = "EVA_TRACE")]
    trace: PathBuf,
    #[command(flatten)]
    catalog: CatalogArg,
    /// Ground-truth pairwise throughput CSV (workload_a,workload_b,tput_a_given_b).
    #[arg(long, env = "EVA_INTERFERENCE")]
    interference: Option<PathBuf>,
    /// Ground-truth throughput for pairs missing from the interference file, or for every pair
    /// when no file is given.
    #[arg(long)]
    interference_fallback: Option<f64>,
    #[arg(long, default_value = "eva", value_parser = parse_scheduler)]
    scheduler: SchedulerKind,
    /// Recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scheduling period in seconds.
    #[arg(long, default_value_t = DEFAULT_PERIOD_S)]
    period: f64,
    /// Throughput the scheduler assumes for never-observed pairs.
    #[arg(long, default_value_t = DEFAULT_PAIRWISE_THROUGHPUT)]
    default_tput: f64,
    /// Multiplies every job checkpoint and launch delay.
    #[arg(long, default_value_t = 1.0)]
    delay_scale: f64,
    /// Disable all instance and job delays.
    #[arg(long)]
    zero_delays: bool,
    /// Sliding window for the reconfiguration-rate estimate, hours.
    #[arg(long, default_value_t = 24.0)]
    window_hours: f64,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Also write the co-location throughput table learned during the run as CSV.
    #[arg(long)]
    table_out: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, default_value_t = 12)]
    tasks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    catalog: CatalogArg,
    /// Skip the exact oracle; costs are then not normalized.
    #[arg(long)]
    no_oracle: bool,
    /// Oracle time budget per trial, milliseconds.
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    /// Run the oracle above its task cap.
    #[arg(long)]
    override_cap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DurationArg {
    Uniform,
    Gavel,
}

#[derive(Args)]
struct GenTraceArgs {
    #[arg(long, default_value_t = 32)]
    num_jobs: usize,
    /// Mean seconds between arrivals.
    #[arg(long, default_value_t = 1200.0)]
    mean_interarrival: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    duration: DurationArg,
    /// Bounds of uniform durations, hours.
    #[arg(long, default_value_t = 0.5)]
    min_hours: f64,
    #[arg(long, default_value_t = 3.0)]
    max_hours: f64,
    #[arg(long, default_value_t = 0.0)]
    multi_task_fraction: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    task_counts: Vec<u32>,
    /// Restrict sampling to these built-in workloads.
    #[arg(long, value_delimiter = ',')]
    workloads: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, env = "EVA_TRACE")]
    trace: PathBuf,
    #[command(flatten)]
    catalog: CatalogArg,
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    #[arg(long)]
    override_cap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinCatalog {
    Cloud,
    WorkedExample,
}

#[derive(Args)]
struct DumpCatalogArgs {
    #[arg(long, value_enum, default_value = "cloud")]
    which: BuiltinCatalog,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolveReport {
    schema_version: u32,
    tasks: usize,
    cost: f64,
    optimal: bool,
    nodes: u64,
    full_reconfiguration_cost: f64,
    no_packing_cost: f64,
    configuration: ClusterConfiguration,
}

fn parse_scheduler(s: &str) -> Result<SchedulerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_catalog(arg: &CatalogArg) -> Result<Catalog> {
    match &arg.catalog {
        Some(p) => {
            Catalog::read_csv(open(p)?).with_context(|| format!("reading catalog {}", p.display()))
        }
        None => Ok(cloud_catalog()),
    }
}

fn load_trace(path: &Path) -> Result<Trace> {
    Trace::read_csv(open(path)?).with_context(|| format!("reading trace {}", path.display()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let catalog = load_catalog(&a.catalog)?;
    let trace = load_trace(&a.trace)?;
    let truth = match &a.interference {
        Some(p) => GroundTruthInterference::read_csv(open(p)?, a.interference_fallback)
            .with_context(|| format!("reading interference {}", p.display()))?,
        None => GroundTruthInterference::uniform(a.interference_fallback.unwrap_or(1.0))?,
    };
    let delays = if a.zero_delays {
        DelayModel::zero()
    } else {
        DelayModel::default()
    };
    let params = SchedulerParams {
        period_s: a.period,
        default_pairwise: a.default_tput,
        window_hours: a.window_hours,
        oracle_cap: a.oracle_cap,
        ..SchedulerParams::default()
    };
    let base = SimConfig {
        scheduler: a.scheduler,
        params,
        delays: delays.with_job_delay_scale(a.delay_scale)?,
        seed: a.seed,
    };
    let mut sim = Simulation::new(&trace, &catalog, &truth, base.clone())?;
    let mut report = sim.run()?;
    if let Some(p) = &a.table_out {
        let mut w = output(Some(p))?;
        sim.table().write_csv(&mut w)?;
        w.flush()?;
    }
    let baseline = if a.scheduler == SchedulerKind::NoPacking {
        report.total_cost
    } else {
        run_simulation(
            &trace,
            &catalog,
            &truth,
            &SimConfig {
                scheduler: SchedulerKind::NoPacking,
                ..base
            },
        )?
        .total_cost
    };
    report.normalized_cost = (baseline > 0.0).then(|| report.total_cost / baseline);
    log::info!(
        "{}: total cost ${:.2}, mean JCT {:.3} h",
        report.scheduler,
        report.total_cost,
        report.mean_jct_hours
    );
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "{}", report.to_json()?)?;
    w.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let catalog = load_catalog(&a.catalog)?;
    let params = ProvisionBenchParams {
        trials: a.trials,
        tasks_per_trial: a.tasks,
        seed: a.seed,
        include_oracle: !a.no_oracle,
        oracle: OracleOptions {
            budget: Duration::from_millis(a.budget_ms),
            override_cap: a.override_cap,
            ..OracleOptions::default()
        },
    };
    let report = provision_bench(&params, &catalog)?;
    if !report.all_optimal {
        log::warn!("oracle budget ran out on some trials; their costs are upper bounds");
    }
    write_json(a.out.as_deref(), &report)
}

fn gen_trace(a: GenTraceArgs) -> Result<()> {
    let defaults = TraceParams::default();
    let params = TraceParams {
        num_jobs: a.num_jobs,
        mean_interarrival_s: a.mean_interarrival,
        duration: match a.duration {
            DurationArg::Uniform => DurationModel::Uniform {
                min_hours: a.min_hours,
                max_hours: a.max_hours,
            },
            DurationArg::Gavel => DurationModel::Gavel,
        },
        workloads: if a.workloads.is_empty() {
            defaults.workloads
        } else {
            a.workloads
        },
        multi_task_fraction: a.multi_task_fraction,
        task_counts: a.task_counts,
        seed: a.seed,
    };
    let trace = generate_trace(&params)?;
    let mut w = output(a.out.as_deref())?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let catalog = load_catalog(&a.catalog)?;
    let trace = load_trace(&a.trace)?;
    let tasks: Vec<Task> = trace
        .jobs
        .iter()
        .flat_map(|j| j.tasks.iter().cloned())
        .collect();
    let opts = OracleOptions {
        budget: Duration::from_millis(a.budget_ms),
        override_cap: a.override_cap,
        ..OracleOptions::default()
    };
    let instance = IlpInstance::new(tasks.clone(), catalog.clone());
    let res = exact_min_cost(&instance, &opts)?;
    if !validate_ilp_solution(&res.config, &instance) {
        return Err(Error::InvalidConfiguration(
            "oracle produced an infeasible configuration".into(),
        )
        .into());
    }
    let report = SolveReport {
        schema_version: 1,
        tasks: tasks.len(),
        cost: res.cost,
        optimal: res.optimal,
        nodes: res.nodes,
        full_reconfiguration_cost: full_reconfiguration_rp(&tasks, &catalog)?.hourly_cost(),
        no_packing_cost: no_packing_schedule(&tasks, &catalog)?.hourly_cost(),
        configuration: res.config,
    };
    write_json(a.out.as_deref(), &report)
}

fn dump_catalog(a: DumpCatalogArgs) -> Result<()> {
    let catalog = match a.which {
        BuiltinCatalog::Cloud => cloud_catalog(),
        BuiltinCatalog::WorkedExample => worked_example_catalog(),
    };
    let mut w = output(a.out.as_deref())?;
    catalog.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Input problems exit with 2, broken invariants with 3.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::CapacityExceeded(_)
            | Error::MissingThroughput(_)
            | Error::InvalidConfiguration(_)
            | Error::ColdModel => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
    }
    if err.downcast_ref::<io::Error>().is_some() {
        return EXIT_INPUT;
    }
    EXIT_INTERNAL
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::ProvisionBench(a) => bench(a),
        Command::GenTrace(a) => gen_trace(a),
        Command::Solve(a) => solve(a),
        Command::DumpCatalog(a) => dump_catalog(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
