//! The worker agent: polls the queue, runs the pipeline stages on each
//! job, supervises the aligner with the early-stop watchdog, and
//! publishes results to the object store.
//!
//! One worker processes one job at a time; fleet throughput comes from
//! running several worker processes against the same queue directory.
//! Within a job the aligner runs concurrently with two helpers: the
//! watchdog thread, which follows the progress log and kills the aligner
//! on a terminate decision, and the heartbeat thread, which keeps
//! extending the queue message's visibility window so a healthy long run
//! is never redelivered.
//!
//! Delivery is at-least-once, so the ordering discipline is the whole
//! correctness story: results are uploaded before the result document,
//! the result document before the message delete. A crash at any point
//! therefore loses no work; at worst the job is redone.

pub mod runners;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::earlystop::{watch, EarlyStopPolicy, WatchOutcome};
use crate::progress::{parse_progress_log, ProgressTailer};
use crate::queue::{FsQueue, Job, QueueError, QueueMessage};
use crate::store::{key_segment, FsObjectStore, ObjectStore, StoreError};

pub use runners::{AlignExit, AlignHandle, AlignRunner, StageCtx, StageOutput, StageRunner};

/// Error from one pipeline stage. Stage failures are job-level: the
/// worker records a failed job and leaves the message for redelivery.
#[derive(Debug, Error)]
#[error("stage {stage} failed: {reason}")]
pub struct StageError {
    pub stage: &'static str,
    pub reason: String,
}

impl StageError {
    pub fn new(stage: &'static str, reason: impl Into<String>) -> Self {
        StageError {
            stage,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum WorkerError {
    #[error("worker configuration invalid: {0}")]
    ConfigInvalid(String),
    #[error("aligner index not available at {path}")]
    IndexUnavailable { path: PathBuf },
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("job {job_id} abandoned mid-run; its message will redeliver")]
    Abandoned { job_id: String },
}

/// Final state of one processed job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JobStatus {
    /// All four stages ran; the run was never judged hopeless.
    Completed,
    /// The watchdog killed the aligner for a low mapping rate; normalize
    /// never ran.
    TerminatedLowMapRate,
    /// A stage or upload failed; the message was left to redeliver.
    Failed,
}

/// Wall seconds spent in each stage. Stages that never ran are absent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fetch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convert: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub align: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<f64>,
}

/// Accounting record for one processed job, stored as
/// `results/<sra_id>/result.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobResult {
    pub job_id: String,
    pub sra_id: String,
    pub status: JobStatus,
    pub stage_timings: StageTimings,
    /// Aligner wall time in seconds, up to completion or the kill.
    pub align_elapsed: f64,
    /// Mapping rate observed at the end of the run or at termination.
    pub observed_mapping_rate: f64,
    /// Fraction of reads processed when the aligner stopped; 1.0 for
    /// completed runs.
    pub processed_fraction_at_stop: f64,
    /// True when the run was never supervised (policy disabled or the
    /// job carried no expected read count).
    pub unjudged: bool,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

impl JobResult {
    /// Store key of the result document for a given input.
    pub fn store_key(sra_id: &str) -> String {
        format!("results/{}/result.json", key_segment(sra_id))
    }
}

/// Per-stage runner selection. Sim runners fabricate desk-scale
/// artifacts; exec runners shell out to user-provided command templates
/// with `{sra_id}`, `{job_id}`, `{workdir}`, and `{index}` placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum StageSpec {
    Sim,
    Exec { command: String },
}

impl Default for StageSpec {
    fn default() -> Self {
        StageSpec::Sim
    }
}

/// Align-stage runner selection. The sim variant replays the job's
/// trace through the simulated aligner under compressed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum AlignSpec {
    Sim {
        /// Wall seconds per simulated second; 0.001 runs 1000x faster
        /// than real time.
        #[serde(default = "default_time_scale")]
        time_scale: f64,
        /// Simulated seconds between progress rows.
        #[serde(default = "default_checkpoint_interval")]
        checkpoint_interval_secs: f64,
    },
    Exec {
        command: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index_path: Option<PathBuf>,
    },
}

pub fn default_time_scale() -> f64 {
    0.001
}

pub fn default_checkpoint_interval() -> f64 {
    60.0
}

impl Default for AlignSpec {
    fn default() -> Self {
        AlignSpec::Sim {
            time_scale: default_time_scale(),
            checkpoint_interval_secs: default_checkpoint_interval(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunnerSpecs {
    pub fetch: StageSpec,
    pub convert: StageSpec,
    pub align: AlignSpec,
    pub normalize: StageSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkerConfig {
    pub queue_dir: PathBuf,
    pub store_root: PathBuf,
    /// Parent for per-job scratch workdirs.
    pub scratch_dir: PathBuf,
    pub policy: EarlyStopPolicy,
    pub visibility_timeout_secs: f64,
    /// Receives after which a job is considered poison.
    pub max_receives: u32,
    /// Sleep between polls of an empty queue.
    pub idle_poll_secs: f64,
    /// Startup model: acquiring the aligner index costs
    /// `fixed_setup_seconds + index_size_bytes / load_bandwidth_bytes_per_s`
    /// once per worker lifetime.
    pub index_size_bytes: u64,
    pub load_bandwidth_bytes_per_s: f64,
    pub fixed_setup_seconds: f64,
    pub runners: RunnerSpecs,
}

impl Default for WorkerConfig {
    fn default() -> Self {
        WorkerConfig {
            queue_dir: PathBuf::from("queue"),
            store_root: PathBuf::from("store"),
            scratch_dir: PathBuf::from("scratch"),
            policy: EarlyStopPolicy::default(),
            visibility_timeout_secs: 3600.0,
            max_receives: 3,
            idle_poll_secs: 1.0,
            index_size_bytes: 0,
            load_bandwidth_bytes_per_s: 100_000_000.0,
            fixed_setup_seconds: 0.0,
            runners: RunnerSpecs::default(),
        }
    }
}

/// Cooperative shutdown for a worker loop. `request_stop` lets the
/// current job finish; `request_abandon` additionally kills a running
/// aligner and leaves the message to redeliver, matching what a spot
/// interruption demands.
#[derive(Debug, Clone, Default)]
pub struct ShutdownSignal {
    stop: Arc<AtomicBool>,
    abandon: Arc<AtomicBool>,
}

impl ShutdownSignal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn request_stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn request_abandon(&self) {
        self.stop.store(true, Ordering::SeqCst);
        self.abandon.store(true, Ordering::SeqCst);
    }

    pub fn stop_requested(&self) -> bool {
        self.stop.load(Ordering::SeqCst)
    }

    pub fn abandon_requested(&self) -> bool {
        self.abandon.load(Ordering::SeqCst)
    }
}

/// Counters returned by a worker loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoopSummary {
    pub completed: u64,
    pub terminated: u64,
    pub failed: u64,
    pub polled_empty: u64,
}

/// Loop behavior knobs beyond the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoopOptions {
    /// Stop after this many processed jobs.
    pub max_jobs: Option<u64>,
    /// Exit on the first empty poll instead of idling, for batch runs.
    pub drain: bool,
}

/// A ready worker: initialized against its queue and store, with the
/// index acquisition cost already accounted.
pub struct Worker {
    queue: FsQueue,
    store: Box<dyn ObjectStore>,
    config: WorkerConfig,
    fetch: Box<dyn StageRunner>,
    convert: Box<dyn StageRunner>,
    align: Box<dyn AlignRunner>,
    normalize: Box<dyn StageRunner>,
    init_overhead_seconds: f64,
}

/// Builds a ready worker from its configuration: opens the queue,
/// creates the store and scratch space, instantiates the per-stage
/// runners, and records the index-acquisition overhead.
pub fn worker_init(config: WorkerConfig) -> Result<Worker, WorkerError> {
    config
        .policy
        .validate()
        .map_err(|e| WorkerError::ConfigInvalid(e.to_string()))?;
    if !(config.visibility_timeout_secs > 0.0) {
        return Err(WorkerError::ConfigInvalid(
            "visibility_timeout_secs must be positive".to_string(),
        ));
    }
    if !(config.idle_poll_secs >= 0.0) {
        return Err(WorkerError::ConfigInvalid(
            "idle_poll_secs must be non-negative".to_string(),
        ));
    }
    if config.max_receives == 0 {
        return Err(WorkerError::ConfigInvalid(
            "max_receives must be at least 1".to_string(),
        ));
    }
    if config.index_size_bytes > 0 && !(config.load_bandwidth_bytes_per_s > 0.0) {
        return Err(WorkerError::ConfigInvalid(
            "load_bandwidth_bytes_per_s must be positive when an index is modeled".to_string(),
        ));
    }
    if !(config.fixed_setup_seconds >= 0.0) {
        return Err(WorkerError::ConfigInvalid(
            "fixed_setup_seconds must be non-negative".to_string(),
        ));
    }

    let queue = FsQueue::open(&config.queue_dir)?;
    let store = FsObjectStore::create(&config.store_root)?;
    fs::create_dir_all(&config.scratch_dir).map_err(|source| {
        WorkerError::Store(StoreError::Io {
            path: config.scratch_dir.clone(),
            source,
        })
    })?;

    // The one-time index acquisition. A real index is only checked for
    // presence; the load itself is costed, not performed.
    if let AlignSpec::Exec {
        index_path: Some(path),
        ..
    } = &config.runners.align
    {
        if !path.exists() {
            return Err(WorkerError::IndexUnavailable { path: path.clone() });
        }
    }
    let init_overhead_seconds = config.fixed_setup_seconds
        + if config.index_size_bytes > 0 {
            config.index_size_bytes as f64 / config.load_bandwidth_bytes_per_s
        } else {
            0.0
        };

    let fetch = runners::stage_runner("fetch", &config.runners.fetch);
    let convert = runners::stage_runner("convert", &config.runners.convert);
    let normalize = runners::stage_runner("normalize", &config.runners.normalize);
    let align = runners::align_runner(&config.runners.align)
        .map_err(|e| WorkerError::ConfigInvalid(e.to_string()))?;

    Ok(Worker {
        queue,
        store: Box::new(store),
        config,
        fetch,
        convert,
        align,
        normalize,
        init_overhead_seconds,
    })
}

/// Outcome of the align stage after the aligner and its watchdog have
/// both finished.
struct AlignStageResult {
    elapsed: f64,
    observed_mapping_rate: f64,
    processed_fraction_at_stop: f64,
    terminated: bool,
    unjudged: bool,
    artifacts: Vec<PathBuf>,
}

impl Worker {
    pub fn init_overhead_seconds(&self) -> f64 {
        self.init_overhead_seconds
    }

    pub fn queue(&self) -> &FsQueue {
        &self.queue
    }

    pub fn store(&self) -> &dyn ObjectStore {
        self.store.as_ref()
    }

    /// Receives and fully processes one job. `Ok(None)` means the queue
    /// had nothing deliverable. A `Failed` result means the job's
    /// message was intentionally left for redelivery.
    pub fn process_one(&self) -> Result<Option<JobResult>, WorkerError> {
        self.process_one_with(&ShutdownSignal::new())
    }

    /// `process_one` with an abandon channel for loop shutdown.
    fn process_one_with(
        &self,
        shutdown: &ShutdownSignal,
    ) -> Result<Option<JobResult>, WorkerError> {
        let visibility = Duration::from_secs_f64(self.config.visibility_timeout_secs);
        let Some(message) = self.queue.receive(visibility)? else {
            return Ok(None);
        };
        let job = message.job.clone();
        log::info!(
            "processing job {} (input {}, receive {})",
            job.job_id,
            job.sra_id,
            message.receive_count
        );

        let workdir = self.config.scratch_dir.join(format!(
            "job_{}_{:08x}",
            key_segment(&job.job_id),
            rand::random::<u32>()
        ));
        fs::create_dir_all(&workdir).map_err(|source| {
            WorkerError::Store(StoreError::Io {
                path: workdir.clone(),
                source,
            })
        })?;

        let heartbeat = Heartbeat::start(
            self.queue.clone(),
            &message,
            visibility,
            shutdown.abandon.clone(),
        );
        let outcome = self.run_job(&job, &workdir, &heartbeat);
        let abandoned = heartbeat.finish();

        // Scratch is reclaimed in every outcome; anything worth keeping
        // was uploaded first.
        if let Err(e) = fs::remove_dir_all(&workdir) {
            log::warn!("could not remove workdir {}: {e}", workdir.display());
        }

        if abandoned {
            return Err(WorkerError::Abandoned {
                job_id: job.job_id.clone(),
            });
        }
        let result = outcome?;
        match result.status {
            JobStatus::Failed => {
                log::warn!(
                    "job {} failed; leaving message for redelivery",
                    job.job_id
                );
            }
            _ => match self.queue.delete(&message.receipt_handle) {
                Ok(()) => {}
                Err(QueueError::StaleReceipt(_)) | Err(QueueError::UnknownReceipt(_)) => {
                    // The window lapsed despite heartbeats (e.g. the
                    // process was paused); someone else may redo the
                    // job, which at-least-once delivery permits.
                    log::warn!(
                        "receipt for job {} went stale before delete; result is stored",
                        job.job_id
                    );
                }
                Err(e) => return Err(e.into()),
            },
        }
        Ok(Some(result))
    }

    /// Runs the four stages and uploads results. Stage and upload
    /// failures come back as a `Failed` JobResult, not an error.
    fn run_job(
        &self,
        job: &Job,
        workdir: &Path,
        heartbeat: &Heartbeat,
    ) -> Result<JobResult, WorkerError> {
        let started_at = Utc::now();
        let mut timings = StageTimings::default();
        let mut artifacts: Vec<PathBuf> = Vec::new();

        let failed = |timings: StageTimings| JobResult {
            job_id: job.job_id.clone(),
            sra_id: job.sra_id.clone(),
            status: JobStatus::Failed,
            stage_timings: timings,
            align_elapsed: 0.0,
            observed_mapping_rate: 0.0,
            processed_fraction_at_stop: 0.0,
            unjudged: false,
            started_at,
            finished_at: Utc::now(),
        };

        let ctx = StageCtx { job, workdir };
        let timed = |runner: &dyn StageRunner| -> Result<(f64, Vec<PathBuf>), StageError> {
            let t0 = Instant::now();
            let output = runner.run(&ctx)?;
            let artifacts = checked_artifacts(output, workdir)?;
            Ok((t0.elapsed().as_secs_f64(), artifacts))
        };

        match timed(self.fetch.as_ref()) {
            Ok((secs, mut a)) => {
                timings.fetch = Some(secs);
                artifacts.append(&mut a);
            }
            Err(e) => {
                log::error!("{e}");
                return Ok(failed(timings));
            }
        }
        match timed(self.convert.as_ref()) {
            Ok((secs, mut a)) => {
                timings.convert = Some(secs);
                artifacts.append(&mut a);
            }
            Err(e) => {
                log::error!("{e}");
                return Ok(failed(timings));
            }
        }

        let align = match self.run_align_stage(job, workdir, heartbeat) {
            Ok(a) => a,
            Err(e) => {
                log::error!("{e}");
                return Ok(failed(timings));
            }
        };
        timings.align = Some(align.elapsed);
        artifacts.extend(align.artifacts.iter().cloned());

        if heartbeat.abandoned() {
            // The abort that stopped the aligner came from shutdown or a
            // lost message, not a judgement; report nothing.
            return Err(WorkerError::Abandoned {
                job_id: job.job_id.clone(),
            });
        }

        let status = if align.terminated {
            JobStatus::TerminatedLowMapRate
        } else {
            match timed(self.normalize.as_ref()) {
                Ok((secs, mut a)) => {
                    timings.normalize = Some(secs);
                    artifacts.append(&mut a);
                }
                Err(e) => {
                    log::error!("{e}");
                    return Ok(failed(timings));
                }
            }
            JobStatus::Completed
        };

        let result = JobResult {
            job_id: job.job_id.clone(),
            sra_id: job.sra_id.clone(),
            status,
            stage_timings: timings,
            align_elapsed: align.elapsed,
            observed_mapping_rate: align.observed_mapping_rate,
            processed_fraction_at_stop: align.processed_fraction_at_stop,
            unjudged: align.unjudged,
            started_at,
            finished_at: Utc::now(),
        };

        if let Err(e) = self.upload(job, workdir, &artifacts, &result) {
            log::error!("upload for job {} failed: {e}", job.job_id);
            let mut failed_result = result;
            failed_result.status = JobStatus::Failed;
            failed_result.finished_at = Utc::now();
            return Ok(failed_result);
        }
        Ok(result)
    }

    /// Starts the aligner, supervises it with the watchdog, and waits
    /// for both to settle.
    fn run_align_stage(
        &self,
        job: &Job,
        workdir: &Path,
        heartbeat: &Heartbeat,
    ) -> Result<AlignStageResult, StageError> {
        let ctx = StageCtx { job, workdir };
        let t0 = Instant::now();
        let mut handle = self.align.start(&ctx)?;

        // The heartbeat may need to kill the aligner on abandon.
        heartbeat.arm(handle.aborter());

        let watched = self.config.policy.enabled && job.expected_total_reads.is_some();
        let watcher = if watched {
            let total = job.expected_total_reads.unwrap();
            let tailer = ProgressTailer::new(handle.progress_log(), self.config.policy.poll_interval());
            let stop = tailer.stop_flag();
            let abort = handle.aborter();
            let policy = self.config.policy.clone();
            let thread =
                std::thread::spawn(move || watch(&policy, total, tailer, move || abort()));
            Some((thread, stop))
        } else {
            if self.config.policy.enabled {
                log::warn!(
                    "job {} has no expected_total_reads; aligner runs unsupervised",
                    job.job_id
                );
            }
            None
        };

        let exit = handle.wait();
        let elapsed = t0.elapsed().as_secs_f64();
        heartbeat.disarm();

        let outcome = watcher.map(|(thread, stop)| {
            stop.store(true, Ordering::SeqCst);
            thread.join().expect("watchdog thread never panics")
        });
        let exit = exit?;

        match exit {
            AlignExit::Aborted => {
                let (rate, fraction) = match outcome {
                    Some(WatchOutcome::TerminatedLowMapRate {
                        observed_mapping_rate,
                        processed_fraction,
                    }) => (observed_mapping_rate, processed_fraction),
                    // Killed from outside the watchdog (abandon path);
                    // the caller checks for that and discards this.
                    _ => (0.0, 0.0),
                };
                Ok(AlignStageResult {
                    elapsed,
                    observed_mapping_rate: rate,
                    processed_fraction_at_stop: fraction,
                    terminated: true,
                    unjudged: false,
                    artifacts: Vec::new(),
                })
            }
            AlignExit::Completed => {
                if let Some(WatchOutcome::WatchFailed(e)) = &outcome {
                    log::warn!("watchdog for job {} failed: {e}; run unjudged", job.job_id);
                }
                let rate = match parse_progress_log(
                    &fs::read_to_string(handle.progress_log()).unwrap_or_default(),
                )
                .records
                .last()
                {
                    Some(last) => self.config.policy.mapping_rate(last),
                    None => {
                        log::warn!("job {} finished with an empty progress log", job.job_id);
                        0.0
                    }
                };
                let unjudged = match &outcome {
                    None => true,
                    Some(WatchOutcome::PassedGate { .. }) => false,
                    // The run outpaced the gate or the tail failed;
                    // either way no judgement was ever made.
                    Some(_) => true,
                };
                Ok(AlignStageResult {
                    elapsed,
                    observed_mapping_rate: rate,
                    processed_fraction_at_stop: 1.0,
                    terminated: false,
                    unjudged,
                    artifacts: handle.artifacts(),
                })
            }
        }
    }

    /// Uploads stage outputs, then logs, then the result document, in
    /// that order, so a stored result document implies everything else
    /// made it.
    fn upload(
        &self,
        job: &Job,
        workdir: &Path,
        artifacts: &[PathBuf],
        result: &JobResult,
    ) -> Result<(), StoreError> {
        let base = format!("results/{}", key_segment(&job.sra_id));
        for artifact in artifacts {
            let name = artifact
                .file_name()
                .and_then(|n| n.to_str())
                .map(key_segment)
                .unwrap_or_else(|| "artifact".to_string());
            let bytes = fs::read(artifact).map_err(|source| StoreError::Io {
                path: artifact.clone(),
                source,
            })?;
            self.store.put(&format!("{base}/outputs/{name}"), &bytes)?;
        }
        for log_path in log_files(workdir) {
            let name = log_path
                .file_name()
                .and_then(|n| n.to_str())
                .map(key_segment)
                .unwrap_or_else(|| "log".to_string());
            let bytes = fs::read(&log_path).map_err(|source| StoreError::Io {
                path: log_path.clone(),
                source,
            })?;
            self.store.put(&format!("{base}/logs/{name}"), &bytes)?;
        }
        let doc = serde_json::to_vec_pretty(result).expect("results serialize");
        self.store.put(&JobResult::store_key(&job.sra_id), &doc)
    }

    /// Polls and processes until shutdown (or the option limits) stop
    /// it, counting outcomes.
    pub fn run_loop(&self, shutdown: &ShutdownSignal, options: LoopOptions) -> LoopSummary {
        let mut summary = LoopSummary::default();
        let mut processed = 0u64;
        while !shutdown.stop_requested() {
            if let Some(max) = options.max_jobs {
                if processed >= max {
                    break;
                }
            }
            match self.process_one_with(shutdown) {
                Ok(Some(result)) => {
                    processed += 1;
                    match result.status {
                        JobStatus::Completed => summary.completed += 1,
                        JobStatus::TerminatedLowMapRate => summary.terminated += 1,
                        JobStatus::Failed => summary.failed += 1,
                    }
                }
                Ok(None) => {
                    summary.polled_empty += 1;
                    if options.drain {
                        break;
                    }
                    let idle = Duration::from_secs_f64(self.config.idle_poll_secs.max(0.0));
                    sliced_sleep(idle, || shutdown.stop_requested());
                }
                Err(WorkerError::Abandoned { job_id }) => {
                    log::info!("abandoned job {job_id} on shutdown");
                    break;
                }
                Err(e) => {
                    log::error!("worker iteration failed: {e}");
                    sliced_sleep(Duration::from_millis(200), || shutdown.stop_requested());
                }
            }
        }
        summary
    }
}

/// Validates that runner outputs stayed inside the workdir.
fn checked_artifacts(output: StageOutput, workdir: &Path) -> Result<Vec<PathBuf>, StageError> {
    for path in &output.artifacts {
        if !path.starts_with(workdir) {
            return Err(StageError::new(
                "artifact-check",
                format!("runner emitted {} outside its workdir", path.display()),
            ));
        }
    }
    Ok(output.artifacts)
}

/// The aligner progress log plus any `*.log` the stages left behind.
fn log_files(workdir: &Path) -> Vec<PathBuf> {
    let mut logs = Vec::new();
    let progress = workdir.join("Log.progress.out");
    if progress.is_file() {
        logs.push(progress);
    }
    if let Ok(entries) = fs::read_dir(workdir) {
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().map(|e| e == "log").unwrap_or(false) && path.is_file() {
                logs.push(path);
            }
        }
    }
    logs.sort();
    logs
}

fn sliced_sleep(total: Duration, cancelled: impl Fn() -> bool) {
    const SLICE: Duration = Duration::from_millis(25);
    let mut remaining = total;
    while !remaining.is_zero() {
        if cancelled() {
            return;
        }
        let step = remaining.min(SLICE);
        std::thread::sleep(step);
        remaining -= step;
    }
}

/// Background keeper of one in-flight message: extends visibility every
/// half window and fires the armed abort when the message is lost or
/// shutdown demands abandoning the job.
struct Heartbeat {
    done: Arc<AtomicBool>,
    abandoned: Arc<AtomicBool>,
    abort_slot: Arc<Mutex<Option<Box<dyn Fn() + Send + Sync>>>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl Heartbeat {
    fn start(
        queue: FsQueue,
        message: &QueueMessage,
        visibility: Duration,
        abandon: Arc<AtomicBool>,
    ) -> Heartbeat {
        let done = Arc::new(AtomicBool::new(false));
        let abandoned = Arc::new(AtomicBool::new(false));
        let abort_slot: Arc<Mutex<Option<Box<dyn Fn() + Send + Sync>>>> =
            Arc::new(Mutex::new(None));

        let receipt = message.receipt_handle.clone();
        let job_id = message.job.job_id.clone();
        let t_done = done.clone();
        let t_abandoned = abandoned.clone();
        let t_slot = abort_slot.clone();
        let half = visibility / 2;
        let thread = std::thread::spawn(move || {
            let fire = |flag: &AtomicBool| {
                if !flag.swap(true, Ordering::SeqCst) {
                    if let Some(abort) = t_slot.lock().unwrap().take() {
                        abort();
                    }
                }
            };
            let mut since_beat = Duration::ZERO;
            const SLICE: Duration = Duration::from_millis(20);
            loop {
                if t_done.load(Ordering::SeqCst) {
                    return;
                }
                if abandon.load(Ordering::SeqCst) {
                    log::info!("abandoning job {job_id} on shutdown request");
                    fire(&t_abandoned);
                    return;
                }
                std::thread::sleep(SLICE);
                since_beat += SLICE;
                if since_beat >= half {
                    since_beat = Duration::ZERO;
                    match queue.extend_visibility(&receipt, half) {
                        Ok(()) => {}
                        Err(QueueError::StaleReceipt(_)) | Err(QueueError::UnknownReceipt(_)) => {
                            log::warn!(
                                "message for job {job_id} no longer ours; abandoning the run"
                            );
                            fire(&t_abandoned);
                            return;
                        }
                        Err(e) => log::warn!("heartbeat for job {job_id} hiccup: {e}"),
                    }
                }
            }
        });
        Heartbeat {
            done,
            abandoned,
            abort_slot,
            thread: Some(thread),
        }
    }

    /// Gives the heartbeat the means to kill the current aligner.
    fn arm(&self, abort: Box<dyn Fn() + Send + Sync>) {
        let mut slot = self.abort_slot.lock().unwrap();
        if self.abandoned.load(Ordering::SeqCst) {
            // Abandon already decided while no abort was armed; kill
            // immediately rather than letting the aligner run on.
            drop(slot);
            abort();
        } else {
            *slot = Some(abort);
        }
    }

    /// Removes the abort capability once the aligner has stopped.
    fn disarm(&self) {
        self.abort_slot.lock().unwrap().take();
    }

    fn abandoned(&self) -> bool {
        self.abandoned.load(Ordering::SeqCst)
    }

    /// Stops the thread and reports whether the job was abandoned.
    fn finish(mut self) -> bool {
        self.done.store(true, Ordering::SeqCst);
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
        self.abandoned.load(Ordering::SeqCst)
    }
}

impl Drop for Heartbeat {
    fn drop(&mut self) {
        self.done.store(true, Ordering::SeqCst);
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
