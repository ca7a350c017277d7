//! Command-line front end: one binary, one workflow per subcommand,
//! one shared config file.
//!
//! Exit codes are a stable contract: 0 success, 1 partial success,
//! 2 input or configuration error, 3 the watchdog decided to
//! terminate, 4 the watch itself failed.

pub mod config;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analyzer::{self, percent_display, read_speedup_csv, SpeedupEstimator};
use crate::earlystop::{watch, WatchOutcome};
use crate::fleetsim::{self, FleetReport, FleetScenario};
use crate::progress::ProgressTailer;
use crate::queue::{FsQueue, Job};
use crate::simalign::{read_traces, simulate_alignment, SimExit};
use crate::worker::{
    worker_init, AlignSpec, JobResult, LoopOptions, RunnerSpecs, ShutdownSignal, StageSpec,
};
use config::{load_config, CliConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TERMINATE: i32 = 3;
pub const EXIT_WATCH_FAILED: i32 = 4;

#[derive(Parser)]
#[command(
    name = "starq",
    version,
    about = "Queue-driven alignment pipeline: enqueue jobs, run workers, \
             watch progress logs, and simulate fleets",
    after_help = "The config file defaults to ./starq.toml; override the \
                  path with --config or the STARQ_CONFIG environment \
                  variable. Flags always win over config file values."
)]
struct Cli {
    /// Path to the TOML config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flag-level overrides for config file fields. All optional; anything
/// set here wins over the file.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Queue directory.
    #[arg(long, global = true, value_name = "DIR")]
    queue_dir: Option<PathBuf>,
    /// Object store root directory.
    #[arg(long, global = true, value_name = "DIR")]
    store_root: Option<PathBuf>,
    /// Scratch directory for per-job workdirs.
    #[arg(long, global = true, value_name = "DIR")]
    scratch_dir: Option<PathBuf>,
    /// Minimum processed fraction before the mapping-rate gate applies.
    #[arg(long, global = true, value_name = "FRACTION")]
    min_fraction: Option<f64>,
    /// Minimum acceptable mapping rate at the gate.
    #[arg(long, global = true, value_name = "RATE")]
    min_rate: Option<f64>,
    /// Seconds between progress log polls.
    #[arg(long, global = true, value_name = "SECS")]
    poll_interval: Option<f64>,
    /// Disable early stopping entirely.
    #[arg(long, global = true)]
    no_early_stop: bool,
    /// Queue message visibility timeout in seconds.
    #[arg(long, global = true, value_name = "SECS")]
    visibility_timeout: Option<f64>,
    /// Deliveries before a message is dead-lettered.
    #[arg(long, global = true, value_name = "N")]
    max_receives: Option<u32>,
    /// Idle sleep between empty queue polls in seconds.
    #[arg(long, global = true, value_name = "SECS")]
    idle_poll: Option<f64>,
    /// Aligner index size in bytes, for the startup cost model.
    #[arg(long, global = true, value_name = "BYTES")]
    index_size_bytes: Option<u64>,
    /// Index load bandwidth in bytes per second.
    #[arg(long, global = true, value_name = "BPS")]
    load_bandwidth: Option<f64>,
    /// Fixed per-worker setup seconds on top of the index load.
    #[arg(long, global = true, value_name = "SECS")]
    fixed_setup: Option<f64>,
    /// Simulated-aligner clock compression (sim align runner only).
    #[arg(long, global = true, value_name = "FACTOR")]
    time_scale: Option<f64>,
    /// Simulated-aligner checkpoint interval in seconds.
    #[arg(long, global = true, value_name = "SECS")]
    checkpoint_interval: Option<f64>,
    /// Shell command template for the fetch stage (switches it to exec).
    #[arg(long, global = true, value_name = "CMD")]
    fetch_command: Option<String>,
    /// Shell command template for the convert stage (switches it to exec).
    #[arg(long, global = true, value_name = "CMD")]
    convert_command: Option<String>,
    /// Shell command template for the align stage (switches it to exec).
    #[arg(long, global = true, value_name = "CMD")]
    align_command: Option<String>,
    /// Shell command template for the normalize stage (switches it to exec).
    #[arg(long, global = true, value_name = "CMD")]
    normalize_command: Option<String>,
    /// Aligner index path, substituted into exec align commands.
    #[arg(long, global = true, value_name = "PATH")]
    index_path: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, config: &mut CliConfig) {
        let w = &mut config.worker;
        if let Some(v) = &self.queue_dir {
            w.queue_dir = v.clone();
        }
        if let Some(v) = &self.store_root {
            w.store_root = v.clone();
        }
        if let Some(v) = &self.scratch_dir {
            w.scratch_dir = v.clone();
        }
        if let Some(v) = self.min_fraction {
            w.policy.min_processed_fraction = v;
        }
        if let Some(v) = self.min_rate {
            w.policy.min_mapping_rate = v;
        }
        if let Some(v) = self.poll_interval {
            w.policy.poll_interval_secs = v;
        }
        if self.no_early_stop {
            w.policy.enabled = false;
        }
        if let Some(v) = self.visibility_timeout {
            w.visibility_timeout_secs = v;
        }
        if let Some(v) = self.max_receives {
            w.max_receives = v;
        }
        if let Some(v) = self.idle_poll {
            w.idle_poll_secs = v;
        }
        if let Some(v) = self.index_size_bytes {
            w.index_size_bytes = v;
        }
        if let Some(v) = self.load_bandwidth {
            w.load_bandwidth_bytes_per_s = v;
        }
        if let Some(v) = self.fixed_setup {
            w.fixed_setup_seconds = v;
        }
        self.apply_runners(&mut w.runners);
    }

    fn apply_runners(&self, runners: &mut RunnerSpecs) {
        let stages = [
            (&self.fetch_command, &mut runners.fetch),
            (&self.convert_command, &mut runners.convert),
            (&self.normalize_command, &mut runners.normalize),
        ];
        for (flag, spec) in stages {
            if let Some(command) = flag {
                *spec = StageSpec::Exec {
                    command: command.clone(),
                };
            }
        }
        if let Some(command) = &self.align_command {
            runners.align = AlignSpec::Exec {
                command: command.clone(),
                index_path: self.index_path.clone(),
            };
        } else {
            match &mut runners.align {
                AlignSpec::Sim {
                    time_scale,
                    checkpoint_interval_secs,
                } => {
                    if let Some(v) = self.time_scale {
                        *time_scale = v;
                    }
                    if let Some(v) = self.checkpoint_interval {
                        *checkpoint_interval_secs = v;
                    }
                }
                AlignSpec::Exec { index_path, .. } => {
                    if self.time_scale.is_some() || self.checkpoint_interval.is_some() {
                        log::warn!(
                            "--time-scale/--checkpoint-interval only apply to the sim \
                             align runner; ignored"
                        );
                    }
                    if let Some(v) = &self.index_path {
                        *index_path = Some(v.clone());
                    }
                }
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Add jobs to the queue from an ID list or a trace corpus.
    Enqueue(EnqueueArgs),
    /// Process queued jobs until stopped.
    Worker(WorkerArgs),
    /// Tail a progress log and decide continue or abort.
    Watchdog(WatchdogArgs),
    /// Replay one trace as a standalone simulated alignment.
    SimulateAlign(SimulateAlignArgs),
    /// Run a fleet scenario over a trace corpus.
    Simulate(SimulateArgs),
    /// Account early-stop savings from traces, results, or aggregates.
    Analyze(AnalyzeArgs),
    /// Weighted speedup between two runtime columns.
    Speedup(SpeedupArgs),
    /// Show message counts per queue state.
    QueueStatus,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["ids_file", "traces"])))]
struct EnqueueArgs {
    /// File with one SRA ID per line; blank lines and # comments skipped.
    #[arg(long, value_name = "FILE")]
    ids_file: Option<PathBuf>,
    /// Trace corpus file; enqueues one job per trace with the expected
    /// read count, input size, and a trace reference filled in.
    #[arg(long, value_name = "FILE")]
    traces: Option<PathBuf>,
}

#[derive(Args)]
struct WorkerArgs {
    /// Stop after resolving this many jobs.
    #[arg(long, value_name = "N")]
    max_jobs: Option<u64>,
    /// Exit once the queue is empty instead of idling.
    #[arg(long)]
    drain: bool,
}

#[derive(Args)]
struct WatchdogArgs {
    /// Progress log to tail.
    #[arg(long, value_name = "PATH")]
    log: PathBuf,
    /// Total reads expected for the run being watched.
    #[arg(long, value_name = "N")]
    total_reads: u64,
    /// Process to SIGTERM if the decision is to terminate.
    #[arg(long, value_name = "PID")]
    pid: Option<i32>,
}

#[derive(Args)]
struct SimulateAlignArgs {
    /// Trace corpus file.
    #[arg(long, value_name = "FILE")]
    traces: PathBuf,
    /// 1-based line of the trace to replay.
    #[arg(long, value_name = "N", default_value_t = 1)]
    trace_line: usize,
    /// Progress log to write.
    #[arg(long, value_name = "PATH", default_value = "Log.progress.out")]
    log: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Trace corpus file.
    #[arg(long, value_name = "FILE")]
    traces: PathBuf,
    /// Fleet size.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Instance price per hour.
    #[arg(long, value_name = "X")]
    price: Option<f64>,
    /// Spot discount in [0, 1).
    #[arg(long, value_name = "D")]
    spot_discount: Option<f64>,
    /// Throughput multiplier applied to every trace.
    #[arg(long, value_name = "S")]
    speed_mult: Option<f64>,
    /// Write the full report as JSON here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the per-job dispatch table as CSV here.
    #[arg(long, value_name = "PATH")]
    jobs_csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["traces", "results", "aggregate"])))]
struct AnalyzeArgs {
    /// Trace corpus file: analytic savings under the configured policy.
    #[arg(long, value_name = "FILE")]
    traces: Option<PathBuf>,
    /// Directory of stored worker results: realized savings.
    #[arg(long, value_name = "DIR")]
    results: Option<PathBuf>,
    /// Aggregate figures as total_full_hours,saved_hours,n_jobs,n_terminated.
    #[arg(long, value_name = "T,S,N,K")]
    aggregate: Option<String>,
    /// Write the report as JSON here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpeedupArgs {
    /// CSV file with a weight,time_base,time_variant header row.
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
    /// Averaging method.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Mean)]
    estimator: EstimatorArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// Weighted arithmetic mean of per-row ratios.
    Mean,
    /// Ratio of weighted time sums.
    RatioOfSums,
}

impl From<EstimatorArg> for SpeedupEstimator {
    fn from(value: EstimatorArg) -> Self {
        match value {
            EstimatorArg::Mean => SpeedupEstimator::WeightedMean,
            EstimatorArg::RatioOfSums => SpeedupEstimator::RatioOfSums,
        }
    }
}

/// Parses arguments, runs the chosen command, and returns the process
/// exit code.
pub fn main_impl() -> i32 {
    let cli = Cli::parse();
    let mut config = match load_config(cli.config.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_INPUT;
        }
    };
    cli.overrides.apply(&mut config);
    let result = match &cli.command {
        Command::Enqueue(args) => cmd_enqueue(&config, args),
        Command::Worker(args) => cmd_worker(config, args),
        Command::Watchdog(args) => cmd_watchdog(&config, args),
        Command::SimulateAlign(args) => cmd_simulate_align(&config, args),
        Command::Simulate(args) => cmd_simulate(&config, args),
        Command::Analyze(args) => cmd_analyze(&config, args),
        Command::Speedup(args) => cmd_speedup(args),
        Command::QueueStatus => cmd_queue_status(&config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn cmd_enqueue(config: &CliConfig, args: &EnqueueArgs) -> anyhow::Result<i32> {
    let queue = FsQueue::create(&config.worker.queue_dir)
        .with_context(|| format!("cannot open queue {}", config.worker.queue_dir.display()))?;
    let jobs = if let Some(path) = &args.ids_file {
        jobs_from_ids_file(path)?
    } else {
        let path = args.traces.as_ref().expect("clap group guarantees one source");
        jobs_from_traces(path)?
    };
    let total = jobs.len();
    let mut enqueued = 0usize;
    for (label, job) in jobs {
        match queue.enqueue(&job) {
            Ok(_) => enqueued += 1,
            Err(e) => eprintln!("{label}: {e}"),
        }
    }
    println!("enqueued {enqueued} of {total} jobs");
    Ok(if enqueued == total { EXIT_OK } else { EXIT_PARTIAL })
}

fn jobs_from_ids_file(path: &Path) -> anyhow::Result<Vec<(String, Job)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read ids file {}", path.display()))?;
    let mut jobs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let id = line.trim();
        if id.is_empty() || id.starts_with('#') {
            continue;
        }
        jobs.push((
            format!("{}:{}", path.display(), i + 1),
            Job {
                job_id: id.to_string(),
                sra_id: id.to_string(),
                expected_total_reads: None,
                fastq_size_bytes: None,
                trace_ref: None,
            },
        ));
    }
    Ok(jobs)
}

fn jobs_from_traces(path: &Path) -> anyhow::Result<Vec<(String, Job)>> {
    let traces = read_traces(path)
        .with_context(|| format!("cannot read trace file {}", path.display()))?;
    // Workers resolve the reference later, possibly from another
    // working directory, so pin the absolute path.
    let canonical = std::fs::canonicalize(path)
        .with_context(|| format!("cannot resolve trace file path {}", path.display()))?;
    Ok(traces
        .into_iter()
        .enumerate()
        .map(|(i, trace)| {
            let line = i + 1;
            (
                format!("{}:{}", path.display(), line),
                Job {
                    job_id: trace.sra_id.clone(),
                    sra_id: trace.sra_id.clone(),
                    expected_total_reads: Some(trace.total_reads),
                    fastq_size_bytes: (trace.fastq_size_bytes > 0)
                        .then_some(trace.fastq_size_bytes),
                    trace_ref: Some(format!("{}:{}", canonical.display(), line)),
                },
            )
        })
        .collect())
}

static INTERRUPTS: AtomicU32 = AtomicU32::new(0);

extern "C" fn on_interrupt(_: libc::c_int) {
    INTERRUPTS.fetch_add(1, Ordering::SeqCst);
}

fn install_interrupt_handler() {
    unsafe {
        let mut action: libc::sigaction = std::mem::zeroed();
        let handler = on_interrupt as extern "C" fn(libc::c_int);
        action.sa_sigaction = handler as usize;
        action.sa_flags = libc::SA_RESTART;
        libc::sigemptyset(&mut action.sa_mask);
        libc::sigaction(libc::SIGINT, &action, std::ptr::null_mut());
        libc::sigaction(libc::SIGTERM, &action, std::ptr::null_mut());
    }
}

fn cmd_worker(config: CliConfig, args: &WorkerArgs) -> anyhow::Result<i32> {
    let worker = worker_init(config.worker).context("worker initialization failed")?;
    install_interrupt_handler();
    let shutdown = ShutdownSignal::new();
    let monitor_shutdown = shutdown.clone();
    let done = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let monitor_done = done.clone();
    // Signal handlers only bump a counter; this thread turns it into
    // shutdown requests. One interrupt finishes the current job first,
    // a second abandons it to redelivery.
    let monitor = std::thread::spawn(move || {
        let mut announced = 0;
        while !monitor_done.load(Ordering::SeqCst) {
            let n = INTERRUPTS.load(Ordering::SeqCst);
            if n >= 1 && announced < 1 {
                announced = 1;
                monitor_shutdown.request_stop();
                eprintln!("interrupted: finishing the current job (interrupt again to abandon)");
            }
            if n >= 2 && announced < 2 {
                announced = 2;
                monitor_shutdown.request_abandon();
                eprintln!("interrupted again: abandoning the current job");
            }
            std::thread::sleep(std::time::Duration::from_millis(20));
        }
    });
    let summary = worker.run_loop(
        &shutdown,
        LoopOptions {
            max_jobs: args.max_jobs,
            drain: args.drain,
        },
    );
    done.store(true, Ordering::SeqCst);
    monitor.join().expect("monitor thread never panics");
    println!(
        "worker done: {} completed, {} terminated, {} failed ({} empty polls)",
        summary.completed, summary.terminated, summary.failed, summary.polled_empty
    );
    Ok(EXIT_OK)
}

fn cmd_watchdog(config: &CliConfig, args: &WatchdogArgs) -> anyhow::Result<i32> {
    let policy = &config.worker.policy;
    policy
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid policy: {e}"))?;
    let tailer = ProgressTailer::new(&args.log, policy.poll_interval());
    let pid = args.pid;
    let outcome = watch(policy, args.total_reads, tailer, move || {
        if let Some(pid) = pid {
            eprintln!("sending SIGTERM to {pid}");
            unsafe {
                libc::kill(pid, libc::SIGTERM);
            }
        }
    });
    Ok(match outcome {
        WatchOutcome::PassedGate {
            observed_mapping_rate,
            processed_fraction,
        } => {
            println!(
                "pass: mapping rate {observed_mapping_rate:.4} at fraction \
                 {processed_fraction:.4}"
            );
            EXIT_OK
        }
        WatchOutcome::CompletedUnjudged => {
            println!("completed without reaching the judgement gate");
            EXIT_OK
        }
        WatchOutcome::TerminatedLowMapRate {
            observed_mapping_rate,
            processed_fraction,
        } => {
            println!(
                "terminate: mapping rate {observed_mapping_rate:.4} at fraction \
                 {processed_fraction:.4}"
            );
            EXIT_TERMINATE
        }
        WatchOutcome::WatchFailed(e) => {
            eprintln!("watch failed: {e}");
            EXIT_WATCH_FAILED
        }
    })
}

fn cmd_simulate_align(config: &CliConfig, args: &SimulateAlignArgs) -> anyhow::Result<i32> {
    let traces = read_traces(&args.traces)
        .with_context(|| format!("cannot read trace file {}", args.traces.display()))?;
    let trace = traces
        .get(args.trace_line.wrapping_sub(1))
        .with_context(|| {
            format!(
                "trace line {} out of range ({} traces)",
                args.trace_line,
                traces.len()
            )
        })?;
    let (time_scale, checkpoint) = match &config.worker.runners.align {
        AlignSpec::Sim {
            time_scale,
            checkpoint_interval_secs,
        } => (*time_scale, *checkpoint_interval_secs),
        AlignSpec::Exec { .. } => {
            bail!("simulate-align needs the sim align runner; the config selects exec")
        }
    };
    let scaled = trace.duration_seconds() * time_scale;
    eprintln!(
        "replaying {} ({} reads, {:.1} s at scale {})",
        trace.sra_id, trace.total_reads, scaled, time_scale
    );
    match simulate_alignment(trace, &args.log, time_scale, checkpoint)? {
        SimExit::Completed => {
            println!("completed; log written to {}", args.log.display());
            Ok(EXIT_OK)
        }
        SimExit::Killed => {
            println!("killed before completion");
            Ok(EXIT_PARTIAL)
        }
    }
}

/// Fleet report plus its early-stop delta against the same scenario
/// with the policy disabled.
#[derive(Serialize)]
struct SimulateDoc {
    report: FleetReport,
    early_stop: EarlyStopDelta,
}

#[derive(Serialize)]
struct EarlyStopDelta {
    baseline_job_seconds: f64,
    saved_seconds: f64,
    saved_fraction: f64,
}

fn cmd_simulate(config: &CliConfig, args: &SimulateArgs) -> anyhow::Result<i32> {
    let traces = read_traces(&args.traces)
        .with_context(|| format!("cannot read trace file {}", args.traces.display()))?;
    let defaults = &config.simulate;
    let scenario = FleetScenario {
        traces,
        worker_count: args.workers.unwrap_or(defaults.workers),
        policy: config.worker.policy.clone(),
        index_size_bytes: config.worker.index_size_bytes,
        load_bandwidth_bytes_per_s: config.worker.load_bandwidth_bytes_per_s,
        fixed_setup_seconds: config.worker.fixed_setup_seconds,
        price_per_hour: args.price.unwrap_or(defaults.price_per_hour),
        spot_discount: args.spot_discount.unwrap_or(defaults.spot_discount),
        speed_multiplier: args.speed_mult.unwrap_or(defaults.speed_multiplier),
    };
    let report = fleetsim::run_fleet(&scenario)?;
    let baseline = if scenario.policy.enabled {
        let mut unstopped = scenario.clone();
        unstopped.policy.enabled = false;
        fleetsim::run_fleet(&unstopped)?.total_job_seconds
    } else {
        report.total_job_seconds
    };
    let saved_seconds = baseline - report.total_job_seconds;
    let saved_fraction = if baseline > 0.0 {
        saved_seconds / baseline
    } else {
        0.0
    };

    println!(
        "fleet: {} workers over {} jobs ({} completed, {} terminated early)",
        report.worker_count,
        report.jobs.len(),
        report.jobs_completed,
        report.jobs_terminated
    );
    println!(
        "makespan: {:.2} h   compute: {:.2} h   cost: {:.2}",
        report.makespan_seconds / 3600.0,
        report.total_compute_seconds / 3600.0,
        report.total_cost
    );
    println!(
        "early stop saved {:.2} h of {:.2} h full compute ({}), saved fraction {}",
        saved_seconds / 3600.0,
        baseline / 3600.0,
        percent_display(saved_fraction),
        saved_fraction
    );

    if let Some(path) = &args.jobs_csv {
        std::fs::write(path, fleetsim::jobs_csv(&report))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("per-job table written to {}", path.display());
    }
    if let Some(path) = &args.out {
        let doc = SimulateDoc {
            report,
            early_stop: EarlyStopDelta {
                baseline_job_seconds: baseline,
                saved_seconds,
                saved_fraction,
            },
        };
        let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
        json.push('\n');
        std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
        println!("report written to {}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_analyze(config: &CliConfig, args: &AnalyzeArgs) -> anyhow::Result<i32> {
    let report = if let Some(path) = &args.traces {
        let traces = read_traces(path)
            .with_context(|| format!("cannot read trace file {}", path.display()))?;
        analyzer::savings_report(
            &traces,
            &config.worker.policy,
            &format!("traces {}", path.display()),
        )?
    } else if let Some(dir) = &args.results {
        let results = read_results_dir(dir)?;
        analyzer::savings_from_results(
            &results,
            analyzer::extrapolated_full_duration,
            &format!("results {}", dir.display()),
        )?
    } else {
        let spec = args.aggregate.as_ref().expect("clap group guarantees one input");
        let (total, saved, n, k) = parse_aggregate(spec)?;
        analyzer::savings_from_aggregates(total, saved, n, k)?
    };
    println!("{report}");
    if let Some(path) = &args.out {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(EXIT_OK)
}

fn parse_aggregate(spec: &str) -> anyhow::Result<(f64, f64, usize, usize)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("--aggregate wants total_full_hours,saved_hours,n_jobs,n_terminated");
    }
    Ok((
        parts[0]
            .parse()
            .with_context(|| format!("bad total hours {:?}", parts[0]))?,
        parts[1]
            .parse()
            .with_context(|| format!("bad saved hours {:?}", parts[1]))?,
        parts[2]
            .parse()
            .with_context(|| format!("bad job count {:?}", parts[2]))?,
        parts[3]
            .parse()
            .with_context(|| format!("bad terminated count {:?}", parts[3]))?,
    ))
}

fn read_results_dir(dir: &Path) -> anyhow::Result<Vec<JobResult>> {
    let mut results = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("cannot scan {}", dir.display()))?;
        if entry.file_type().is_file() && entry.file_name() == "result.json" {
            let text = std::fs::read_to_string(entry.path())
                .with_context(|| format!("cannot read {}", entry.path().display()))?;
            let result: JobResult = serde_json::from_str(&text)
                .with_context(|| format!("cannot parse {}", entry.path().display()))?;
            results.push(result);
        }
    }
    if results.is_empty() {
        bail!("no result.json documents under {}", dir.display());
    }
    Ok(results)
}

fn cmd_speedup(args: &SpeedupArgs) -> anyhow::Result<i32> {
    let rows = read_speedup_csv(&args.csv)?;
    let estimator: SpeedupEstimator = args.estimator.into();
    let value = estimator.estimate(&rows)?;
    println!("speedup: {value:.2}");
    Ok(EXIT_OK)
}

fn cmd_queue_status(config: &CliConfig) -> anyhow::Result<i32> {
    let queue = FsQueue::open(&config.worker.queue_dir)
        .with_context(|| format!("cannot open queue {}", config.worker.queue_dir.display()))?;
    let status = queue.status()?;
    println!("pending  {}", status.pending);
    println!("inflight {}", status.inflight);
    println!("dead     {}", status.dead);
    println!("done     {}", status.done);
    Ok(EXIT_OK)
}
