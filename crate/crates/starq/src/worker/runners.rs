//! Pluggable stage implementations.
//!
//! Two families ship. `sim` runners fabricate the pipeline at desk
//! scale: fetch and convert drop small placeholder files, align replays
//! the job's trace through the simulated aligner, normalize writes a
//! stub count matrix. `exec` runners shell out to user-configured
//! command templates and treat the child's exit code as the verdict, so
//! the real tools (prefetch, fasterq-dump, STAR, a DESeq2 script) can be
//! dropped in per stage without code changes.
//!
//! The align stage differs from the other three: it runs concurrently
//! with its watchdog, so instead of a blocking `run` it exposes a
//! handle with the progress-log location, an abort capability, and a
//! wait that reports whether the aligner finished or was killed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use crate::queue::Job;
use crate::simalign::{SimExit, TraceRef};

use super::{AlignSpec, StageError, StageSpec};

/// Everything a stage may look at: the job being processed and the
/// scratch directory all outputs must stay inside.
pub struct StageCtx<'a> {
    pub job: &'a Job,
    pub workdir: &'a Path,
}

/// Files a stage produced that should be uploaded with the results.
/// Intermediate files (SRA downloads, FASTQ conversions) are not
/// artifacts; they exist only in the workdir.
#[derive(Debug, Default)]
pub struct StageOutput {
    pub artifacts: Vec<PathBuf>,
}

/// A blocking pipeline stage (fetch, convert, normalize).
pub trait StageRunner: Send + Sync {
    fn stage_name(&self) -> &'static str;
    fn run(&self, ctx: &StageCtx) -> Result<StageOutput, StageError>;
}

/// How a supervised aligner ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignExit {
    Completed,
    /// Stopped by the abort capability, not of its own accord.
    Aborted,
}

/// A started aligner. `wait` must be called exactly once.
pub trait AlignHandle: Send {
    /// Where the aligner writes its progress log.
    fn progress_log(&self) -> PathBuf;
    /// A thread-safe kill switch for this run. May be invoked multiple
    /// times; all invocations after the first are no-ops.
    fn aborter(&self) -> Box<dyn Fn() + Send + Sync>;
    /// Blocks until the aligner stops.
    fn wait(&mut self) -> Result<AlignExit, StageError>;
    /// Output files of a completed run.
    fn artifacts(&self) -> Vec<PathBuf>;
}

/// The align stage: starts the aligner and hands back its handle.
pub trait AlignRunner: Send + Sync {
    fn start(&self, ctx: &StageCtx) -> Result<Box<dyn AlignHandle>, StageError>;
}

/// Builds the configured runner for a blocking stage.
pub fn stage_runner(stage: &'static str, spec: &StageSpec) -> Box<dyn StageRunner> {
    match spec {
        StageSpec::Sim => Box::new(SimStage { stage }),
        StageSpec::Exec { command } => Box::new(ExecStage {
            stage,
            template: command.clone(),
        }),
    }
}

/// Builds the configured align runner.
pub fn align_runner(spec: &AlignSpec) -> Result<Box<dyn AlignRunner>, StageError> {
    match spec {
        AlignSpec::Sim {
            time_scale,
            checkpoint_interval_secs,
        } => {
            if !(*time_scale > 0.0 && time_scale.is_finite()) {
                return Err(StageError::new("align", "time_scale must be positive"));
            }
            if !(*checkpoint_interval_secs > 0.0) {
                return Err(StageError::new(
                    "align",
                    "checkpoint_interval_secs must be positive",
                ));
            }
            Ok(Box::new(SimAlign {
                time_scale: *time_scale,
                checkpoint_interval_secs: *checkpoint_interval_secs,
            }))
        }
        AlignSpec::Exec {
            command,
            index_path,
        } => Ok(Box::new(ExecAlign {
            template: command.clone(),
            index_path: index_path.clone(),
        })),
    }
}

/// Simulated fetch/convert/normalize: fabricate the artifacts the next
/// stage (or the results consumer) expects, instantly.
struct SimStage {
    stage: &'static str,
}

impl StageRunner for SimStage {
    fn stage_name(&self) -> &'static str {
        self.stage
    }

    fn run(&self, ctx: &StageCtx) -> Result<StageOutput, StageError> {
        let write = |name: String, contents: String| -> Result<PathBuf, StageError> {
            let path = ctx.workdir.join(name);
            fs::write(&path, contents)
                .map_err(|e| StageError::new(self.stage, e.to_string()))?;
            Ok(path)
        };
        let sra = &ctx.job.sra_id;
        match self.stage {
            "fetch" => {
                write(format!("{sra}.sra"), format!("placeholder SRA payload for {sra}\n"))?;
                Ok(StageOutput::default())
            }
            "convert" => {
                write(format!("{sra}_1.fastq"), format!("@{sra}.1\nACGT\n+\nFFFF\n"))?;
                write(format!("{sra}_2.fastq"), format!("@{sra}.2\nTGCA\n+\nFFFF\n"))?;
                Ok(StageOutput::default())
            }
            "normalize" => {
                let path = write(
                    "normalized_counts.csv".to_string(),
                    format!("gene,{sra}\nGENE0001,0.0\nGENE0002,0.0\n"),
                )?;
                Ok(StageOutput {
                    artifacts: vec![path],
                })
            }
            other => Err(StageError::new(self.stage, format!("unknown sim stage {other}"))),
        }
    }
}

/// Replays the job's trace through the simulated aligner on a thread.
struct SimAlign {
    time_scale: f64,
    checkpoint_interval_secs: f64,
}

impl AlignRunner for SimAlign {
    fn start(&self, ctx: &StageCtx) -> Result<Box<dyn AlignHandle>, StageError> {
        let job = ctx.job;
        let trace_ref = job
            .trace_ref
            .as_deref()
            .ok_or_else(|| StageError::new("align", "sim align requires a trace_ref on the job"))?;
        let parsed = TraceRef::parse(trace_ref)
            .ok_or_else(|| StageError::new("align", format!("bad trace_ref '{trace_ref}'")))?;
        let trace = parsed
            .load()
            .map_err(|e| StageError::new("align", e.to_string()))?;

        let log_path = ctx.workdir.join("Log.progress.out");
        let counts_path = ctx.workdir.join("ReadsPerGene.out.tab");
        let cancel = Arc::new(AtomicBool::new(false));

        let t_log = log_path.clone();
        let t_counts = counts_path.clone();
        let t_cancel = cancel.clone();
        let time_scale = self.time_scale;
        let interval = self.checkpoint_interval_secs;
        let sra = job.sra_id.clone();
        let thread = std::thread::spawn(move || {
            let exit = crate::simalign::simulate_alignment_cancellable(
                &trace, &t_log, time_scale, interval, &t_cancel,
            )?;
            if exit == SimExit::Completed {
                let counts = format!(
                    "N_unmapped\t0\t0\t0\nGENE0001\t{}\t0\t0\n",
                    trace.total_reads
                );
                if let Err(e) = fs::write(&t_counts, counts) {
                    return Err(crate::simalign::SimError::Io {
                        path: t_counts.clone(),
                        source: e,
                    });
                }
                let _ = fs::write(
                    t_log.with_file_name("Log.final.log"),
                    format!("simulated alignment of {sra} complete\n"),
                );
            }
            Ok(exit)
        });

        Ok(Box::new(SimAlignHandle {
            log_path,
            counts_path,
            cancel,
            thread: Some(thread),
            completed: false,
        }))
    }
}

struct SimAlignHandle {
    log_path: PathBuf,
    counts_path: PathBuf,
    cancel: Arc<AtomicBool>,
    thread: Option<std::thread::JoinHandle<Result<SimExit, crate::simalign::SimError>>>,
    completed: bool,
}

impl AlignHandle for SimAlignHandle {
    fn progress_log(&self) -> PathBuf {
        self.log_path.clone()
    }

    fn aborter(&self) -> Box<dyn Fn() + Send + Sync> {
        let cancel = self.cancel.clone();
        Box::new(move || cancel.store(true, Ordering::SeqCst))
    }

    fn wait(&mut self) -> Result<AlignExit, StageError> {
        let thread = self
            .thread
            .take()
            .expect("wait is called exactly once");
        match thread.join() {
            Ok(Ok(SimExit::Completed)) => {
                self.completed = true;
                Ok(AlignExit::Completed)
            }
            Ok(Ok(SimExit::Killed)) => Ok(AlignExit::Aborted),
            Ok(Err(e)) => Err(StageError::new("align", e.to_string())),
            Err(_) => Err(StageError::new("align", "simulated aligner panicked")),
        }
    }

    fn artifacts(&self) -> Vec<PathBuf> {
        if self.completed {
            vec![self.counts_path.clone()]
        } else {
            Vec::new()
        }
    }
}

/// Fills a command template's placeholders and shell-quotes the values.
fn render_template(template: &str, job: &Job, workdir: &Path, index: Option<&Path>) -> String {
    let quoted = |s: &str| {
        let escaped = s.replace('\'', "'\\''");
        format!("'{escaped}'")
    };
    template
        .replace("{sra_id}", &quoted(&job.sra_id))
        .replace("{job_id}", &quoted(&job.job_id))
        .replace("{workdir}", &quoted(&workdir.to_string_lossy()))
        .replace(
            "{index}",
            &quoted(
                &index
                    .map(|p| p.to_string_lossy().into_owned())
                    .unwrap_or_default(),
            ),
        )
}

/// Blocking stage that runs a shell command in the workdir.
struct ExecStage {
    stage: &'static str,
    template: String,
}

impl StageRunner for ExecStage {
    fn stage_name(&self) -> &'static str {
        self.stage
    }

    fn run(&self, ctx: &StageCtx) -> Result<StageOutput, StageError> {
        let rendered = render_template(&self.template, ctx.job, ctx.workdir, None);
        let status = Command::new("sh")
            .arg("-c")
            .arg(&rendered)
            .current_dir(ctx.workdir)
            .stdin(Stdio::null())
            .status()
            .map_err(|e| StageError::new(self.stage, format!("spawn failed: {e}")))?;
        if !status.success() {
            return Err(StageError::new(
                self.stage,
                format!("command exited with {status}: {rendered}"),
            ));
        }
        Ok(StageOutput::default())
    }
}

/// Aligner as an external process. The child gets its own process
/// group, so an abort can kill the whole tool tree (the shell plus the
/// aligner it spawned) without touching the worker.
struct ExecAlign {
    template: String,
    index_path: Option<PathBuf>,
}

impl AlignRunner for ExecAlign {
    fn start(&self, ctx: &StageCtx) -> Result<Box<dyn AlignHandle>, StageError> {
        let rendered = render_template(
            &self.template,
            ctx.job,
            ctx.workdir,
            self.index_path.as_deref(),
        );
        let child = {
            use std::os::unix::process::CommandExt;
            Command::new("sh")
                .arg("-c")
                .arg(&rendered)
                .current_dir(ctx.workdir)
                .stdin(Stdio::null())
                .process_group(0)
                .spawn()
                .map_err(|e| StageError::new("align", format!("spawn failed: {e}")))?
        };
        Ok(Box::new(ExecAlignHandle {
            log_path: ctx.workdir.join("Log.progress.out"),
            workdir: ctx.workdir.to_path_buf(),
            pid: child.id() as i32,
            child,
            aborted: Arc::new(AtomicBool::new(false)),
            reaped: Arc::new(AtomicBool::new(false)),
        }))
    }
}

struct ExecAlignHandle {
    log_path: PathBuf,
    workdir: PathBuf,
    pid: i32,
    child: std::process::Child,
    aborted: Arc<AtomicBool>,
    /// Set once the child is waited on, gating the delayed SIGKILL so a
    /// recycled pid can never be signaled.
    reaped: Arc<AtomicBool>,
}

impl AlignHandle for ExecAlignHandle {
    fn progress_log(&self) -> PathBuf {
        self.log_path.clone()
    }

    fn aborter(&self) -> Box<dyn Fn() + Send + Sync> {
        let pid = self.pid;
        let aborted = self.aborted.clone();
        let reaped = self.reaped.clone();
        Box::new(move || {
            if aborted.swap(true, Ordering::SeqCst) {
                return;
            }
            // Ask the whole group nicely, then follow up in force if it
            // is still around after a grace period.
            unsafe { libc::kill(-pid, libc::SIGTERM) };
            let reaped = reaped.clone();
            std::thread::spawn(move || {
                std::thread::sleep(Duration::from_secs(10));
                if !reaped.load(Ordering::SeqCst) {
                    unsafe { libc::kill(-pid, libc::SIGKILL) };
                }
            });
        })
    }

    fn wait(&mut self) -> Result<AlignExit, StageError> {
        let status = self
            .child
            .wait()
            .map_err(|e| StageError::new("align", format!("wait failed: {e}")));
        self.reaped.store(true, Ordering::SeqCst);
        let status = status?;
        if self.aborted.load(Ordering::SeqCst) {
            return Ok(AlignExit::Aborted);
        }
        if status.success() {
            Ok(AlignExit::Completed)
        } else {
            Err(StageError::new(
                "align",
                format!("aligner exited with {status}"),
            ))
        }
    }

    fn artifacts(&self) -> Vec<PathBuf> {
        // Gene-count output under STAR's default name, when present.
        let counts = self.workdir.join("ReadsPerGene.out.tab");
        if counts.is_file() {
            vec![counts]
        } else {
            Vec::new()
        }
    }
}
