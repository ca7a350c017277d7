//! At-least-once job queue on the local filesystem.
//!
//! One queue is one directory tree. Each message is a single JSON file
//! whose name is canonical for its `job_id`, living in exactly one state
//! directory:
//!
//! ```text
//! queue/
//!   pending/    visible messages waiting for a receiver
//!   inflight/   received messages inside their visibility window
//!   dead/       poison messages parked after repeated failures
//!   done/       audit archive of deleted messages
//!   tmp/        claim files and staging for atomic operations
//! ```
//!
//! Every mutation claims the message file by renaming it into `tmp/`.
//! Rename on one filesystem is atomic, so the rename winner holds the
//! message exclusively across threads and processes with no locks or
//! shared memory. Content updates write a fresh temp file and rename it
//! over the claim, so a crash at any instant leaves either the old or
//! the new document, never a torn one. Claims orphaned by a crashed
//! process are restored to their source state once they outlive a grace
//! period.
//!
//! Semantics mirror a cloud queue: receivers get a message exclusively
//! until its visibility timeout lapses, then it becomes deliverable
//! again with a higher receive count; deletion requires the receipt
//! handle from the latest receive and fails stale if the message was
//! redelivered meanwhile. Delivery is at-least-once; consumers must
//! tolerate duplicates. Ordering is by enqueue time with job id as the
//! tiebreak, best effort only.
//!
//! Deleted messages move to `done/` instead of being unlinked. Depth and
//! receive ignore them; they serve as an audit trail and make duplicate
//! job detection cover the whole queue history.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Work item: align one input run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    /// Unique within the queue, including already completed jobs.
    pub job_id: String,
    /// Accession of the input run.
    pub sra_id: String,
    /// Total reads the aligner will process; the denominator for the
    /// early-stop gate. Without it a run cannot be judged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_total_reads: Option<u64>,
    /// Input size, used as the weight in speedup reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fastq_size_bytes: Option<u64>,
    /// `path:line` pointer to a simulation trace driving this job.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_ref: Option<String>,
}

impl Job {
    pub fn validate(&self) -> Result<(), QueueError> {
        if self.job_id.is_empty() {
            return Err(QueueError::InvalidJob("job_id is empty".to_string()));
        }
        if self.sra_id.is_empty() {
            return Err(QueueError::InvalidJob("sra_id is empty".to_string()));
        }
        if self.expected_total_reads == Some(0) {
            return Err(QueueError::InvalidJob(
                "expected_total_reads must be positive when present".to_string(),
            ));
        }
        Ok(())
    }
}

/// On-disk message document. The job fields are flattened so the file is
/// a single flat JSON object with ISO-8601 timestamps.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MessageDoc {
    #[serde(flatten)]
    job: Job,
    receive_count: u32,
    enqueued_at: DateTime<Utc>,
    visible_at: DateTime<Utc>,
}

/// Proof of the latest receive of a message. Valid until the message's
/// visibility timeout lapses and it is delivered to someone else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiptHandle(String);

impl ReceiptHandle {
    /// Reconstructs a handle previously rendered with `to_string`, for
    /// passing between processes.
    pub fn from_token(token: impl Into<String>) -> Self {
        ReceiptHandle(token.into())
    }

    fn parts(&self) -> Option<(&str, u32)> {
        let (basename, count) = self.0.rsplit_once('#')?;
        let count: u32 = count.parse().ok()?;
        if basename.is_empty() {
            return None;
        }
        Some((basename, count))
    }
}

impl std::fmt::Display for ReceiptHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A received message plus the handle needed to delete it or extend its
/// visibility window.
#[derive(Debug, Clone)]
pub struct QueueMessage {
    pub job: Job,
    pub receive_count: u32,
    pub enqueued_at: DateTime<Utc>,
    pub visible_at: DateTime<Utc>,
    pub receipt_handle: ReceiptHandle,
}

#[derive(Debug, Error)]
pub enum QueueError {
    #[error("job_id '{0}' already exists in this queue")]
    DuplicateJobId(String),
    #[error("receipt {0} is stale: the message was redelivered")]
    StaleReceipt(String),
    #[error("receipt {0} does not match any live message")]
    UnknownReceipt(String),
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("corrupt message document {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("{root} is not a queue directory")]
    NotAQueue { root: PathBuf },
    #[error("queue storage failure at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Message counts per state. Claims in progress count toward the state
/// they were taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueueStatus {
    pub pending: usize,
    pub inflight: usize,
    pub dead: usize,
    pub done: usize,
}

const STATES: [&str; 4] = ["pending", "inflight", "dead", "done"];
const DEFAULT_CLAIM_GRACE: Duration = Duration::from_secs(30);

/// Handle to a queue directory. Cheap to clone; every clone and every
/// process holding the same directory shares the queue.
#[derive(Debug, Clone)]
pub struct FsQueue {
    root: PathBuf,
    /// How long an abandoned claim may sit in `tmp/` before any other
    /// queue user moves it back to its source state. Must comfortably
    /// exceed the longest pause a live process can hit mid-mutation.
    claim_grace: Duration,
}

impl FsQueue {
    /// Creates the queue directory tree (idempotent) and returns a handle.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, QueueError> {
        let root = root.into();
        for dir in STATES.iter().chain(std::iter::once(&"tmp")) {
            let path = root.join(dir);
            fs::create_dir_all(&path).map_err(|source| QueueError::Storage { path, source })?;
        }
        Ok(FsQueue {
            root,
            claim_grace: DEFAULT_CLAIM_GRACE,
        })
    }

    /// Opens an existing queue, refusing paths that are not one.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, QueueError> {
        let root = root.into();
        for dir in ["pending", "inflight", "dead"] {
            if !root.join(dir).is_dir() {
                return Err(QueueError::NotAQueue { root });
            }
        }
        // Auxiliary directories may be missing in a tree restored from
        // elsewhere; recreate them.
        for dir in ["done", "tmp"] {
            let path = root.join(dir);
            fs::create_dir_all(&path).map_err(|source| QueueError::Storage { path, source })?;
        }
        Ok(FsQueue {
            root,
            claim_grace: DEFAULT_CLAIM_GRACE,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Overrides the orphaned-claim grace period, mainly so crash tests
    /// recover quickly.
    pub fn with_claim_grace(mut self, grace: Duration) -> Self {
        self.claim_grace = grace;
        self
    }

    fn dir(&self, state: &str) -> PathBuf {
        self.root.join(state)
    }

    /// Durably adds a job as an immediately visible pending message and
    /// returns its message id. Job ids are unique across the queue's
    /// whole history, completed and dead jobs included.
    pub fn enqueue(&self, job: &Job) -> Result<String, QueueError> {
        job.validate()?;
        let basename = basename_for(&job.job_id);
        // Check every state except pending up front; pending is covered
        // atomically by the link below. A duplicate racing a state
        // transition can slip through here, which degrades to one extra
        // redelivery of the same job id, not a lost or duplicated job:
        // the canonical file name keeps at most one live message per id
        // in any one state.
        for state in ["inflight", "dead", "done"] {
            if self.dir(state).join(&basename).exists() {
                return Err(QueueError::DuplicateJobId(job.job_id.clone()));
            }
        }
        if self.find_claim(&basename)?.is_some() {
            return Err(QueueError::DuplicateJobId(job.job_id.clone()));
        }

        let now = Utc::now();
        let doc = MessageDoc {
            job: job.clone(),
            receive_count: 0,
            enqueued_at: now,
            visible_at: now,
        };
        let staging = self
            .dir("tmp")
            .join(format!("enq_{:08x}_{}", rand::random::<u32>(), basename));
        write_doc(&staging, &doc)?;
        let target = self.dir("pending").join(&basename);
        match fs::hard_link(&staging, &target) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                let _ = fs::remove_file(&staging);
                return Err(QueueError::DuplicateJobId(job.job_id.clone()));
            }
            Err(source) => {
                let _ = fs::remove_file(&staging);
                return Err(QueueError::Storage {
                    path: target,
                    source,
                });
            }
        }
        let _ = fs::remove_file(&staging);
        sync_dir(&self.dir("pending"));
        Ok(basename)
    }

    /// Delivers the oldest visible message, if any, hiding it for
    /// `visibility_timeout`. Also performs queue housekeeping: restores
    /// orphaned claims, returns expired in-flight messages to pending,
    /// and parks unreadable documents in `dead/`.
    pub fn receive(&self, visibility_timeout: Duration) -> Result<Option<QueueMessage>, QueueError> {
        self.recover_orphans()?;
        self.requeue_expired()?;

        let now = Utc::now();
        // Peek without claiming to build a delivery order; claims below
        // re-establish the truth per message.
        let mut candidates: Vec<(DateTime<Utc>, String)> = Vec::new();
        for name in self.list_state("pending")? {
            let path = self.dir("pending").join(&name);
            match read_doc(&path) {
                Ok(doc) => {
                    if doc.visible_at <= now {
                        candidates.push((doc.enqueued_at, name));
                    }
                }
                Err(ReadDocError::Vanished) => {}
                Err(ReadDocError::Corrupt(reason)) => {
                    if let Some(guard) = self.claim("pending", &name)? {
                        log::warn!("dead-lettering corrupt message {name}: {reason}");
                        guard.release(self, "dead")?;
                    }
                }
                Err(ReadDocError::Io(source)) => {
                    return Err(QueueError::Storage { path, source })
                }
            }
        }
        candidates.sort();

        for (_, name) in candidates {
            let Some(guard) = self.claim("pending", &name)? else {
                continue;
            };
            let mut doc = match guard.read(self) {
                Ok(doc) => doc,
                Err(ReadDocError::Corrupt(reason)) => {
                    log::warn!("dead-lettering corrupt message {name}: {reason}");
                    guard.release(self, "dead")?;
                    continue;
                }
                Err(ReadDocError::Vanished) => continue,
                Err(ReadDocError::Io(source)) => {
                    return Err(QueueError::Storage {
                        path: self.dir("tmp").join(&name),
                        source,
                    })
                }
            };
            let now = Utc::now();
            if doc.visible_at > now {
                // Left over from a receive that crashed after updating
                // the document; deliverable again once the window lapses.
                guard.release(self, "pending")?;
                continue;
            }
            doc.receive_count += 1;
            doc.visible_at = now
                + chrono::Duration::from_std(visibility_timeout)
                    .unwrap_or_else(|_| chrono::Duration::seconds(i64::MAX / 2));
            guard.write(self, &doc)?;
            guard.release(self, "inflight")?;
            return Ok(Some(QueueMessage {
                receipt_handle: ReceiptHandle(format!("{name}#{}", doc.receive_count)),
                job: doc.job,
                receive_count: doc.receive_count,
                enqueued_at: doc.enqueued_at,
                visible_at: doc.visible_at,
            }));
        }
        Ok(None)
    }

    /// Permanently retires the message named by `receipt`. Fails with
    /// `StaleReceipt` when the message has been redelivered since (the
    /// newer receive now owns it) and `UnknownReceipt` when no live
    /// message matches.
    pub fn delete(&self, receipt: &ReceiptHandle) -> Result<(), QueueError> {
        self.with_current_message(receipt, |guard, _doc| guard.release(self, "done"))
    }

    /// Pushes the message's visibility window `extra` further into the
    /// future, keeping it exclusively held past the original timeout.
    pub fn extend_visibility(
        &self,
        receipt: &ReceiptHandle,
        extra: Duration,
    ) -> Result<(), QueueError> {
        self.with_current_message(receipt, |guard, mut doc| {
            doc.visible_at += chrono::Duration::from_std(extra)
                .unwrap_or_else(|_| chrono::Duration::seconds(i64::MAX / 2));
            guard.write(self, &doc)?;
            guard.release(self, "inflight")
        })
    }

    /// Claims the in-flight message behind `receipt`, verifies the
    /// receipt is current, and hands the guard to `apply`.
    fn with_current_message<F>(&self, receipt: &ReceiptHandle, apply: F) -> Result<(), QueueError>
    where
        F: FnOnce(ClaimGuard, MessageDoc) -> Result<(), QueueError>,
    {
        let Some((basename, count)) = receipt.parts() else {
            return Err(QueueError::UnknownReceipt(receipt.0.clone()));
        };
        let Some(guard) = self.claim("inflight", basename)? else {
            // Not in flight. Anywhere else alive means the receipt
            // expired and the queue moved on; gone or archived means
            // there is nothing to act on.
            return match self.find_message(basename)? {
                Some("pending") | Some("dead") | Some("claim") => {
                    Err(QueueError::StaleReceipt(receipt.0.clone()))
                }
                Some(_) | None => Err(QueueError::UnknownReceipt(receipt.0.clone())),
            };
        };
        let doc = match guard.read(self) {
            Ok(doc) => doc,
            Err(ReadDocError::Corrupt(reason)) => {
                guard.release(self, "dead")?;
                return Err(QueueError::Corrupt {
                    path: self.dir("dead").join(basename),
                    reason,
                });
            }
            Err(ReadDocError::Vanished) => {
                return Err(QueueError::UnknownReceipt(receipt.0.clone()))
            }
            Err(ReadDocError::Io(source)) => {
                return Err(QueueError::Storage {
                    path: self.dir("tmp").join(basename),
                    source,
                })
            }
        };
        if doc.receive_count != count {
            guard.release(self, "inflight")?;
            return Err(QueueError::StaleReceipt(receipt.0.clone()));
        }
        apply(guard, doc)
    }

    /// Moves pending messages that have been received at least
    /// `max_receives` times to `dead/`, after first requeueing expired
    /// in-flight messages so their receive counts are considered.
    /// Returns how many messages were dead-lettered.
    pub fn reap(&self, max_receives: u32) -> Result<usize, QueueError> {
        self.recover_orphans()?;
        self.requeue_expired()?;
        let mut moved = 0;
        for name in self.list_state("pending")? {
            let path = self.dir("pending").join(&name);
            let count = match read_doc(&path) {
                Ok(doc) => doc.receive_count,
                Err(_) => continue,
            };
            if count < max_receives {
                continue;
            }
            let Some(guard) = self.claim("pending", &name)? else {
                continue;
            };
            match guard.read(self) {
                Ok(doc) if doc.receive_count >= max_receives => {
                    guard.release(self, "dead")?;
                    moved += 1;
                }
                Ok(_) => guard.release(self, "pending")?,
                Err(_) => guard.release(self, "dead")?,
            }
        }
        Ok(moved)
    }

    /// Counts messages per state without touching them.
    pub fn status(&self) -> Result<QueueStatus, QueueError> {
        let mut status = QueueStatus::default();
        for state in STATES {
            let n = self.list_state(state)?.len();
            match state {
                "pending" => status.pending = n,
                "inflight" => status.inflight = n,
                "dead" => status.dead = n,
                _ => status.done = n,
            }
        }
        // Claims belong to the state they were taken from.
        for name in self.list_state("tmp")? {
            match claim_source(&name) {
                Some(("pending", _, _)) => status.pending += 1,
                Some(("inflight", _, _)) => status.inflight += 1,
                _ => {}
            }
        }
        Ok(status)
    }

    fn list_state(&self, state: &str) -> Result<Vec<String>, QueueError> {
        let dir = self.dir(state);
        let mut names = Vec::new();
        let entries = fs::read_dir(&dir).map_err(|source| QueueError::Storage {
            path: dir.clone(),
            source,
        })?;
        for entry in entries {
            let entry = entry.map_err(|source| QueueError::Storage {
                path: dir.clone(),
                source,
            })?;
            if let Some(name) = entry.file_name().to_str() {
                names.push(name.to_string());
            }
        }
        names.sort();
        Ok(names)
    }

    /// Takes exclusive ownership of `src/basename` by renaming it into
    /// `tmp/`. `None` means another owner got there first (or the
    /// message is not in that state).
    fn claim(&self, src: &'static str, basename: &str) -> Result<Option<ClaimGuard>, QueueError> {
        let claim_name = format!(
            "claim_{src}_{:020}_{:08x}__{basename}",
            Utc::now().timestamp_millis().max(0),
            rand::random::<u32>(),
        );
        let from = self.dir(src).join(basename);
        let to = self.dir("tmp").join(&claim_name);
        match fs::rename(&from, &to) {
            Ok(()) => Ok(Some(ClaimGuard {
                claim_path: to,
                basename: basename.to_string(),
                src,
                consumed: false,
            })),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(QueueError::Storage { path: from, source }),
        }
    }

    /// Restores claims orphaned by crashed processes and clears stale
    /// staging files.
    fn recover_orphans(&self) -> Result<(), QueueError> {
        let now_ms = Utc::now().timestamp_millis().max(0) as u64;
        let grace_ms = self.claim_grace.as_millis() as u64;
        for name in self.list_state("tmp")? {
            let path = self.dir("tmp").join(&name);
            if let Some((src, claimed_ms, basename)) = claim_source(&name) {
                if claimed_ms.saturating_add(grace_ms) < now_ms {
                    // The claimer is presumed dead; put the message back
                    // where it was taken from. If the claimer is in fact
                    // alive its release will recreate the file in the
                    // destination state, and the survivor is delivered
                    // at least once either way.
                    let _ = fs::rename(&path, self.dir(src).join(basename));
                }
            } else if is_stale_staging(&path, self.claim_grace) {
                let _ = fs::remove_file(&path);
            }
        }
        Ok(())
    }

    /// Returns expired in-flight messages to pending for redelivery.
    fn requeue_expired(&self) -> Result<(), QueueError> {
        let now = Utc::now();
        for name in self.list_state("inflight")? {
            let path = self.dir("inflight").join(&name);
            let expired = match read_doc(&path) {
                Ok(doc) => doc.visible_at <= now,
                Err(ReadDocError::Corrupt(_)) => true,
                Err(_) => continue,
            };
            if !expired {
                continue;
            }
            let Some(guard) = self.claim("inflight", &name)? else {
                continue;
            };
            match guard.read(self) {
                Ok(doc) if doc.visible_at <= Utc::now() => guard.release(self, "pending")?,
                Ok(_) => guard.release(self, "inflight")?,
                Err(ReadDocError::Corrupt(reason)) => {
                    log::warn!("dead-lettering corrupt message {name}: {reason}");
                    guard.release(self, "dead")?;
                }
                Err(_) => guard.release(self, "inflight")?,
            }
        }
        Ok(())
    }

    /// Where a message file currently lives: a state directory name, or
    /// "claim" while someone holds it in `tmp/`.
    fn find_message(&self, basename: &str) -> Result<Option<&'static str>, QueueError> {
        for state in STATES {
            if self.dir(state).join(basename).exists() {
                return Ok(Some(state));
            }
        }
        if self.find_claim(basename)?.is_some() {
            return Ok(Some("claim"));
        }
        Ok(None)
    }

    fn find_claim(&self, basename: &str) -> Result<Option<String>, QueueError> {
        for name in self.list_state("tmp")? {
            if let Some((_, _, b)) = claim_source(&name) {
                if b == basename {
                    return Ok(Some(name));
                }
            }
        }
        Ok(None)
    }
}

/// Exclusive ownership of one message file while it sits in `tmp/`.
/// Dropping an unconsumed guard puts the message back where it came
/// from, so panics do not strand messages until grace recovery.
struct ClaimGuard {
    claim_path: PathBuf,
    basename: String,
    src: &'static str,
    consumed: bool,
}

impl ClaimGuard {
    fn read(&self, _queue: &FsQueue) -> Result<MessageDoc, ReadDocError> {
        read_doc(&self.claim_path)
    }

    /// Atomically replaces the claimed document's content.
    fn write(&self, queue: &FsQueue, doc: &MessageDoc) -> Result<(), QueueError> {
        let staging = queue.dir("tmp").join(format!(
            "wr_{:08x}_{}",
            rand::random::<u32>(),
            self.basename
        ));
        write_doc(&staging, doc)?;
        fs::rename(&staging, &self.claim_path).map_err(|source| QueueError::Storage {
            path: self.claim_path.clone(),
            source,
        })
    }

    /// Moves the message into `dst`, consuming the claim.
    fn release(mut self, queue: &FsQueue, dst: &str) -> Result<(), QueueError> {
        let target = queue.dir(dst).join(&self.basename);
        self.consumed = true;
        let result = fs::rename(&self.claim_path, &target);
        result.map_err(|source| QueueError::Storage {
            path: target,
            source,
        })
    }
}

impl Drop for ClaimGuard {
    fn drop(&mut self) {
        if !self.consumed {
            let back = self
                .claim_path
                .parent()
                .map(|tmp| tmp.parent().unwrap_or(tmp).join(self.src).join(&self.basename));
            if let Some(back) = back {
                let _ = fs::rename(&self.claim_path, back);
            }
        }
    }
}

enum ReadDocError {
    /// The file disappeared between listing and reading (lost a race).
    Vanished,
    Corrupt(String),
    Io(io::Error),
}

fn read_doc(path: &Path) -> Result<MessageDoc, ReadDocError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(ReadDocError::Vanished),
        Err(e) => return Err(ReadDocError::Io(e)),
    };
    serde_json::from_str(&text).map_err(|e| ReadDocError::Corrupt(e.to_string()))
}

fn write_doc(path: &Path, doc: &MessageDoc) -> Result<(), QueueError> {
    let json = serde_json::to_string(doc).expect("message documents serialize");
    let write = || -> io::Result<()> {
        let mut file = fs::File::create(path)?;
        use io::Write;
        file.write_all(json.as_bytes())?;
        file.write_all(b"\n")?;
        file.sync_all()
    };
    write().map_err(|source| QueueError::Storage {
        path: path.to_path_buf(),
        source,
    })
}

fn sync_dir(dir: &Path) {
    if let Ok(f) = fs::File::open(dir) {
        let _ = f.sync_all();
    }
}

/// Parses `claim_{state}_{millis}_{nonce}__{basename}`.
fn claim_source(name: &str) -> Option<(&'static str, u64, &str)> {
    let rest = name.strip_prefix("claim_")?;
    let state = STATES
        .iter()
        .chain(std::iter::once(&"tmp"))
        .find(|s| rest.starts_with(&format!("{s}_")))?;
    let rest = &rest[state.len() + 1..];
    let (meta, basename) = rest.split_once("__")?;
    let (millis, _nonce) = meta.split_once('_')?;
    let millis: u64 = millis.parse().ok()?;
    Some((state, millis, basename))
}

fn is_stale_staging(path: &Path, grace: Duration) -> bool {
    match fs::metadata(path).and_then(|m| m.modified()) {
        Ok(modified) => modified.elapsed().map(|age| age > grace).unwrap_or(false),
        Err(_) => false,
    }
}

/// Canonical message file name for a job id: a sanitized, length-capped
/// copy of the id plus a hash of the full id, so any two distinct ids
/// map to distinct names while staying filesystem-safe.
fn basename_for(job_id: &str) -> String {
    let sanitized: String = job_id
        .chars()
        .take(64)
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '-'
            }
        })
        .collect();
    format!("{sanitized}_{:016x}.json", fnv1a64(job_id.as_bytes()))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
