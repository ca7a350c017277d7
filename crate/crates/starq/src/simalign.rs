//! Trace-driven stand-in for a real aligner process.
//!
//! A [`RunTrace`] describes one alignment run abstractly: how many reads,
//! how fast they are processed (constant-speed model), and what mapped
//! percentages the progress log should report. [`simulate_alignment`]
//! replays a trace into a canonical progress log over scaled wall time,
//! so watchdog and worker behavior can be exercised in seconds instead of
//! hours. Killing the simulator mid-run leaves a log that simply stops,
//! with no sentinel, exactly like a killed aligner.
//!
//! Trace corpora live in line-delimited JSON files, one trace per line,
//! so thousand-run cohorts stream without being held in memory by tools
//! that do not need to.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::progress::{format_row, header_lines, ProgressRecord, SENTINEL, TIMESTAMP_YEAR};

/// The three mapped-percentage columns of a progress row, each in
/// `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingTriple {
    pub unique: f64,
    pub multi: f64,
    pub multi_plus: f64,
}

impl MappingTriple {
    pub fn sum(&self) -> f64 {
        self.unique + self.multi + self.multi_plus
    }

    /// Mapping rate as a fraction: all three columns over 100.
    pub fn rate(&self) -> f64 {
        self.sum() / 100.0
    }

    fn validate(&self, context: &str) -> Result<(), TraceError> {
        for (name, v) in [
            ("unique", self.unique),
            ("multi", self.multi),
            ("multi_plus", self.multi_plus),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(TraceError::MappingOutOfRange {
                    context: context.to_string(),
                    field: name,
                    value: v,
                });
            }
        }
        if self.sum() > 100.0 {
            return Err(TraceError::MappingSumExceeded {
                context: context.to_string(),
                sum: self.sum(),
            });
        }
        Ok(())
    }
}

/// A point where the reported mapping changes: rows at processed
/// fractions up to and including `fraction` report `mapping`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheckpoint {
    pub fraction: f64,
    pub mapping: MappingTriple,
}

/// Abstract description of one alignment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub sra_id: String,
    pub total_reads: u64,
    /// Mean read length in bases, reported verbatim in the log.
    pub read_length: u64,
    /// Constant processing speed in millions of reads per hour.
    pub speed_mreads_per_hr: f64,
    /// Mapped percentages reported once the run is past any profiled
    /// checkpoints; under the default constant model, reported from the
    /// first row.
    pub final_mapping: MappingTriple,
    /// Optional step-function override of the constant model. Must be
    /// strictly increasing in fraction, all within `(0, 1]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rate_profile: Vec<RateCheckpoint>,
    /// Size of the input FASTQ, used as the weight in speedup reports.
    #[serde(default)]
    pub fastq_size_bytes: u64,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{context}: {field} must be positive")]
    NonPositive { context: String, field: &'static str },
    #[error("{context}: mapping {field} = {value} is outside [0, 100]")]
    MappingOutOfRange {
        context: String,
        field: &'static str,
        value: f64,
    },
    #[error("{context}: mapping percentages sum to {sum} > 100")]
    MappingSumExceeded { context: String, sum: f64 },
    #[error("{context}: rate_profile fractions must be strictly increasing within (0, 1]")]
    BadProfile { context: String },
}

impl RunTrace {
    pub fn validate(&self) -> Result<(), TraceError> {
        let ctx = || format!("trace '{}'", self.sra_id);
        if self.total_reads == 0 {
            return Err(TraceError::NonPositive {
                context: ctx(),
                field: "total_reads",
            });
        }
        if self.read_length == 0 {
            return Err(TraceError::NonPositive {
                context: ctx(),
                field: "read_length",
            });
        }
        if !(self.speed_mreads_per_hr > 0.0 && self.speed_mreads_per_hr.is_finite()) {
            return Err(TraceError::NonPositive {
                context: ctx(),
                field: "speed_mreads_per_hr",
            });
        }
        self.final_mapping.validate(&ctx())?;
        let mut prev = 0.0;
        for cp in &self.rate_profile {
            if !(cp.fraction > prev && cp.fraction <= 1.0) {
                return Err(TraceError::BadProfile { context: ctx() });
            }
            prev = cp.fraction;
            cp.mapping.validate(&ctx())?;
        }
        Ok(())
    }

    /// Full (unscaled) run duration in seconds under the constant-speed
    /// model.
    pub fn duration_seconds(&self) -> f64 {
        self.total_reads as f64 / (self.speed_mreads_per_hr * 1e6) * 3600.0
    }

    /// Mapping rate of the finished run, as a fraction.
    pub fn final_mapping_rate(&self) -> f64 {
        self.final_mapping.rate()
    }

    /// Mapped percentages reported at a given processed fraction: the
    /// first profile checkpoint at or past the fraction, else the final
    /// mapping.
    pub fn mapping_at_fraction(&self, fraction: f64) -> MappingTriple {
        for cp in &self.rate_profile {
            if fraction <= cp.fraction {
                return cp.mapping;
            }
        }
        self.final_mapping
    }

    /// Reads processed per (unscaled) second.
    fn reads_per_second(&self) -> f64 {
        self.speed_mreads_per_hr * 1e6 / 3600.0
    }

    /// The full sequence of progress rows for this run, one per
    /// `checkpoint_interval` seconds of simulated time, ending with a row
    /// at exactly `total_reads`. `at_seconds` is the simulated time at
    /// which each row is written.
    pub fn progress_schedule(&self, checkpoint_interval_secs: f64) -> Vec<ScheduledRow> {
        assert!(
            checkpoint_interval_secs > 0.0,
            "checkpoint interval must be positive"
        );
        let rps = self.reads_per_second();
        let base = NaiveDate::from_ymd_opt(TIMESTAMP_YEAR, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let mut rows = Vec::new();
        // Relative slack so a row landing on the exact full duration is
        // not pushed to an extra row by float noise in rps * t.
        let done_at = self.duration_seconds() * (1.0 - 1e-12);
        let mut k = 1u64;
        loop {
            let t = k as f64 * checkpoint_interval_secs;
            let mut reads = (rps * t).floor() as u64;
            if reads >= self.total_reads || t >= done_at {
                reads = self.total_reads;
            }
            let fraction = reads as f64 / self.total_reads as f64;
            let mapping = self.mapping_at_fraction(fraction);
            rows.push(ScheduledRow {
                at_seconds: t,
                record: ProgressRecord {
                    timestamp: base + chrono::Duration::seconds(t.round() as i64),
                    speed_mreads_per_hr: self.speed_mreads_per_hr,
                    reads_processed: reads,
                    read_length: self.read_length,
                    pct_mapped_unique: mapping.unique,
                    pct_mapped_multi: mapping.multi,
                    pct_mapped_multi_plus: mapping.multi_plus,
                },
            });
            if reads == self.total_reads {
                return rows;
            }
            k += 1;
        }
    }
}

/// One row of a simulated run's progress log, tagged with the simulated
/// time at which it appears.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledRow {
    pub at_seconds: f64,
    pub record: ProgressRecord,
}

/// How a simulated alignment ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimExit {
    /// All reads processed; the sentinel row was written.
    Completed,
    /// Cancelled mid-run; the log stops without a sentinel.
    Killed,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trace invalid: {0}")]
    Trace(#[from] TraceError),
    #[error("failed writing progress log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Replays a trace into a progress log at `log_path`.
///
/// Simulated time is compressed by `time_scale`: a row due at simulated
/// second `t` is written `t * time_scale` wall seconds after the start.
/// The file is created with its header lines immediately, each row is
/// flushed as written, and the sentinel is appended only on completion.
pub fn simulate_alignment(
    trace: &RunTrace,
    log_path: &Path,
    time_scale: f64,
    checkpoint_interval_secs: f64,
) -> Result<SimExit, SimError> {
    let never = AtomicBool::new(false);
    simulate_alignment_cancellable(trace, log_path, time_scale, checkpoint_interval_secs, &never)
}

/// [`simulate_alignment`] with a kill switch. Setting `cancel` makes the
/// run stop within roughly one scheduling slice, leaving the log without
/// a sentinel.
pub fn simulate_alignment_cancellable(
    trace: &RunTrace,
    log_path: &Path,
    time_scale: f64,
    checkpoint_interval_secs: f64,
    cancel: &AtomicBool,
) -> Result<SimExit, SimError> {
    trace.validate()?;
    assert!(
        time_scale > 0.0 && time_scale.is_finite(),
        "time_scale must be positive"
    );
    let io_err = |source| SimError::Io {
        path: log_path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(log_path).map_err(io_err)?;
    file.write_all(header_lines().as_bytes()).map_err(io_err)?;
    file.flush().map_err(io_err)?;

    let mut prev = 0.0;
    for row in trace.progress_schedule(checkpoint_interval_secs) {
        if !sleep_scaled((row.at_seconds - prev) * time_scale, cancel) {
            return Ok(SimExit::Killed);
        }
        prev = row.at_seconds;
        let line = format_row(&row.record).expect("valid trace produces valid rows");
        file.write_all(line.as_bytes()).map_err(io_err)?;
        file.flush().map_err(io_err)?;
    }
    file.write_all(format!("{SENTINEL}\n").as_bytes())
        .map_err(io_err)?;
    file.flush().map_err(io_err)?;
    Ok(SimExit::Completed)
}

/// Sleeps `seconds` in short slices, returning false early if `cancel`
/// is raised.
fn sleep_scaled(seconds: f64, cancel: &AtomicBool) -> bool {
    const SLICE: Duration = Duration::from_millis(10);
    let mut remaining = Duration::from_secs_f64(seconds.max(0.0));
    loop {
        if cancel.load(Ordering::SeqCst) {
            return false;
        }
        if remaining.is_zero() {
            return true;
        }
        let step = remaining.min(SLICE);
        std::thread::sleep(step);
        remaining -= step;
    }
}

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("cannot read trace file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: bad trace record: {reason}")]
    BadRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

/// Reads a line-delimited JSON trace file; blank lines are skipped and
/// every trace is validated. Errors carry 1-based line numbers.
pub fn read_traces(path: &Path) -> Result<Vec<RunTrace>, TraceFileError> {
    let file = fs::File::open(path).map_err(|source| TraceFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut traces = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| TraceFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let trace = parse_trace_line(&line).map_err(|reason| TraceFileError::BadRecord {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        })?;
        traces.push(trace);
    }
    Ok(traces)
}

/// Reads one trace from a specific 1-based line of a trace file.
pub fn read_trace_line(path: &Path, line_no: usize) -> Result<RunTrace, TraceFileError> {
    let file = fs::File::open(path).map_err(|source| TraceFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    for (idx, line) in reader.lines().enumerate() {
        if idx + 1 != line_no {
            continue;
        }
        let line = line.map_err(|source| TraceFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        return parse_trace_line(&line).map_err(|reason| TraceFileError::BadRecord {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        });
    }
    Err(TraceFileError::BadRecord {
        path: path.to_path_buf(),
        line: line_no,
        reason: "no such line".to_string(),
    })
}

fn parse_trace_line(line: &str) -> Result<RunTrace, String> {
    let trace: RunTrace = serde_json::from_str(line).map_err(|e| e.to_string())?;
    trace.validate().map_err(|e| e.to_string())?;
    Ok(trace)
}

/// Writes traces as line-delimited JSON, one per line.
pub fn write_traces(path: &Path, traces: &[RunTrace]) -> Result<(), TraceFileError> {
    let mut out = String::new();
    for trace in traces {
        out.push_str(&serde_json::to_string(trace).expect("traces serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| TraceFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A reference to one trace inside a trace file, written `path:line`
/// with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRef {
    pub path: PathBuf,
    pub line: usize,
}

impl TraceRef {
    pub fn parse(s: &str) -> Option<TraceRef> {
        let (path, line) = s.rsplit_once(':')?;
        let line: usize = line.parse().ok()?;
        if path.is_empty() || line == 0 {
            return None;
        }
        Some(TraceRef {
            path: PathBuf::from(path),
            line,
        })
    }

    pub fn load(&self) -> Result<RunTrace, TraceFileError> {
        read_trace_line(&self.path, self.line)
    }
}

impl fmt::Display for TraceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.path.display(), self.line)
    }
}

use std::fmt;

/// Generates a deterministic corpus of `n` constant-rate traces of which
/// exactly `n_low` have a final mapping rate below 0.30 (all in
/// `[0.02, 0.28]`) and the rest at or above it (all in `[0.32, 0.98]`).
/// The gap around the threshold keeps judgements unambiguous under float
/// rounding. Percentages come out in exact tenths so serialized logs
/// reproduce them bit for bit.
pub fn synthetic_corpus(seed: u64, n: usize, n_low: usize) -> Vec<RunTrace> {
    assert!(n_low <= n, "n_low must not exceed n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces: Vec<RunTrace> = (0..n)
        .map(|i| {
            let low = i < n_low;
            let total_tenths: u32 = if low {
                rng.gen_range(20..=280)
            } else {
                rng.gen_range(320..=980)
            };
            let multi_tenths = rng.gen_range(0..=total_tenths.min(80));
            let plus_tenths = rng.gen_range(0..=(total_tenths - multi_tenths).min(15));
            let unique_tenths = total_tenths - multi_tenths - plus_tenths;
            RunTrace {
                sra_id: format!("SRR{:08}", 10_000_000 + i as u64),
                total_reads: rng.gen_range(200_000..=80_000_000),
                read_length: rng.gen_range(50..=151),
                speed_mreads_per_hr: rng.gen_range(300..=6000) as f64 / 10.0,
                final_mapping: MappingTriple {
                    unique: unique_tenths as f64 / 10.0,
                    multi: multi_tenths as f64 / 10.0,
                    multi_plus: plus_tenths as f64 / 10.0,
                },
                rate_profile: Vec::new(),
                fastq_size_bytes: rng.gen_range(100_000_000..=20_000_000_000),
            }
        })
        .collect();
    traces.shuffle(&mut rng);
    traces
}
