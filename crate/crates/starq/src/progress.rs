//! The STAR `Log.progress.out` format: records, parsing, serialization,
//! and incremental tailing.
//!
//! STAR appends one row to `Log.progress.out` per reporting interval while
//! an alignment runs, and finishes the file with an `ALL DONE!` sentinel.
//! The layout here is fixed to the STAR 2.7.10b writer: two header lines,
//! then whitespace-separated rows of twelve columns where the first column
//! is a three-token `MMM dd HH:mm:ss` timestamp and percent columns carry a
//! trailing `%`:
//!
//! ```text
//!            Time    Speed        Read     Read   Mapped   Mapped   Mapped   Mapped Unmapped Unmapped Unmapped Unmapped
//!                     M/hr      number   length   unique   length MMrate(%)    multi   multi+       MM    short    other
//! Jan 01 12:00:00    100.0     1000000      100    25.0%     99.0     0.5%     4.0%     0.5%     0.0%    60.0%    10.0%
//! ALL DONE!
//! ```
//!
//! Only the columns a watchdog needs are retained in [`ProgressRecord`];
//! the mapped-length, mismatch-rate, and unmapped columns are parsed and
//! dropped. Extra trailing columns are ignored so minor STAR version drift
//! does not break the parser.
//!
//! The format carries no year. Parsed timestamps are pinned to the (leap)
//! reference year [`TIMESTAMP_YEAR`], so serialize→parse round-trips are
//! exact for records carrying that year.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Final line STAR writes when an alignment finishes.
pub const SENTINEL: &str = "ALL DONE!";

/// Reference year attached to parsed timestamps (the format has none).
/// A leap year, so `Feb 29` rows parse.
pub const TIMESTAMP_YEAR: i32 = 2000;

/// Slack allowed on the sum of the three mapped percentages, covering the
/// one-decimal rounding STAR applies per column.
pub const PERCENT_SUM_SLACK: f64 = 0.5;

/// One parsed row of a `Log.progress.out` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    /// Wall-clock time of the row, second resolution. The year is pinned to
    /// [`TIMESTAMP_YEAR`] when parsed from a log.
    pub timestamp: NaiveDateTime,
    /// Alignment speed in millions of reads per hour.
    pub speed_mreads_per_hr: f64,
    /// Cumulative reads processed so far.
    pub reads_processed: u64,
    /// Mean read length in bases.
    pub read_length: u64,
    /// Percent of processed reads mapped to a unique locus, in `[0, 100]`.
    pub pct_mapped_unique: f64,
    /// Percent mapped to multiple loci, in `[0, 100]`.
    pub pct_mapped_multi: f64,
    /// Percent mapped to too many loci, in `[0, 100]`.
    pub pct_mapped_multi_plus: f64,
}

impl ProgressRecord {
    /// Sum of the three mapped percentages.
    pub fn mapped_percent_sum(&self) -> f64 {
        self.pct_mapped_unique + self.pct_mapped_multi + self.pct_mapped_multi_plus
    }

    /// Checks the per-record field bounds.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let pcts = [
            ("pct_mapped_unique", self.pct_mapped_unique),
            ("pct_mapped_multi", self.pct_mapped_multi),
            ("pct_mapped_multi_plus", self.pct_mapped_multi_plus),
        ];
        for (name, v) in pcts {
            if !(0.0..=100.0).contains(&v) {
                return Err(InvariantViolation::PercentOutOfRange {
                    field: name,
                    value: v,
                });
            }
        }
        let sum = self.mapped_percent_sum();
        if sum > 100.0 + PERCENT_SUM_SLACK {
            return Err(InvariantViolation::PercentSumExceeded { sum });
        }
        if !(self.speed_mreads_per_hr >= 0.0) {
            return Err(InvariantViolation::NegativeSpeed {
                value: self.speed_mreads_per_hr,
            });
        }
        Ok(())
    }
}

/// A record list that breaks the [`ProgressRecord`] field bounds.
#[derive(Debug, Error, PartialEq)]
pub enum InvariantViolation {
    #[error("{field} = {value} is outside [0, 100]")]
    PercentOutOfRange { field: &'static str, value: f64 },
    #[error("mapped percentages sum to {sum}, above 100 + rounding slack")]
    PercentSumExceeded { sum: f64 },
    #[error("speed {value} is negative or not a number")]
    NegativeSpeed { value: f64 },
}

/// A data row the parser could not interpret. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct MalformedRow {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for MalformedRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Non-fatal oddities noticed while parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseWarning {
    /// `reads_processed` went backwards between successive rows.
    NonMonotonicReads {
        line: usize,
        previous: u64,
        current: u64,
    },
}

/// Outcome of a one-shot parse. Malformed rows are collected rather than
/// aborting the parse; call [`ParsedLog::strict`] to treat them as fatal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub records: Vec<ProgressRecord>,
    pub malformed: Vec<MalformedRow>,
    pub warnings: Vec<ParseWarning>,
    /// True when the `ALL DONE!` sentinel was seen.
    pub complete: bool,
}

impl ParsedLog {
    /// Returns the records, failing on the first malformed row.
    pub fn strict(self) -> Result<Vec<ProgressRecord>, ParseError> {
        match self.malformed.into_iter().next() {
            Some(row) => Err(ParseError::MalformedRow(row)),
            None => Ok(self.records),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed progress row at {0}")]
    MalformedRow(MalformedRow),
}

/// Parses the full contents of a `Log.progress.out` file.
///
/// Header lines and the sentinel are skipped. A trailing line not
/// terminated by a newline is assumed to be mid-write and silently
/// deferred, matching what a tailer racing the writer must do.
pub fn parse_progress_log(text: &str) -> ParsedLog {
    let mut out = ParsedLog::default();
    let mut last_reads: Option<u64> = None;
    for (idx, line) in complete_lines(text).enumerate() {
        let line_no = idx + 1;
        match classify_line(line) {
            LineKind::Blank | LineKind::Header => {}
            LineKind::Sentinel => out.complete = true,
            LineKind::Data => match parse_row(line) {
                Ok(rec) => {
                    if let Some(prev) = last_reads {
                        if rec.reads_processed < prev {
                            out.warnings.push(ParseWarning::NonMonotonicReads {
                                line: line_no,
                                previous: prev,
                                current: rec.reads_processed,
                            });
                        }
                    }
                    last_reads = Some(rec.reads_processed);
                    out.records.push(rec);
                }
                Err(reason) => out.malformed.push(MalformedRow {
                    line: line_no,
                    reason,
                }),
            },
        }
    }
    out
}

/// Iterates newline-terminated lines only; an unterminated tail is skipped.
fn complete_lines(text: &str) -> impl Iterator<Item = &str> {
    text.split_inclusive('\n')
        .filter(|l| l.ends_with('\n'))
        .map(|l| l.trim_end_matches(['\n', '\r']))
}

enum LineKind {
    Blank,
    Header,
    Sentinel,
    Data,
}

fn classify_line(line: &str) -> LineKind {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return LineKind::Blank;
    }
    if trimmed == SENTINEL {
        return LineKind::Sentinel;
    }
    // The two header lines start with the "Time" heading and the "M/hr"
    // unit row respectively.
    let first = trimmed.split_whitespace().next().unwrap_or("");
    if first == "Time" || first == "M/hr" {
        return LineKind::Header;
    }
    LineKind::Data
}

fn parse_row(line: &str) -> Result<ProgressRecord, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    // Nine leading columns: the three-token timestamp plus eight values
    // through the multi+ percentage.
    if tokens.len() < 11 {
        return Err(format!(
            "expected at least 11 whitespace-separated tokens, found {}",
            tokens.len()
        ));
    }
    let timestamp = parse_timestamp(tokens[0], tokens[1], tokens[2])?;
    let speed = parse_number(tokens[3], "speed")?;
    let reads_processed = parse_integer(tokens[4], "read number")?;
    let read_length = parse_integer(tokens[5], "read length")?;
    let pct_unique = parse_percent(tokens[6], "mapped unique")?;
    // Mapped length and mismatch rate are part of the canonical row but not
    // retained.
    parse_number(tokens[7], "mapped length")?;
    parse_percent(tokens[8], "mismatch rate")?;
    let pct_multi = parse_percent(tokens[9], "mapped multi")?;
    let pct_multi_plus = parse_percent(tokens[10], "mapped multi+")?;
    // Trailing unmapped percentages (and anything a future STAR adds) are
    // tolerated whether or not they parse.
    let record = ProgressRecord {
        timestamp,
        speed_mreads_per_hr: speed,
        reads_processed,
        read_length,
        pct_mapped_unique: pct_unique,
        pct_mapped_multi: pct_multi,
        pct_mapped_multi_plus: pct_multi_plus,
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

fn parse_timestamp(month: &str, day: &str, time: &str) -> Result<NaiveDateTime, String> {
    let composed = format!("{TIMESTAMP_YEAR} {month} {day} {time}");
    NaiveDateTime::parse_from_str(&composed, "%Y %b %d %H:%M:%S")
        .map_err(|e| format!("bad timestamp '{month} {day} {time}': {e}"))
}

fn parse_number(token: &str, what: &str) -> Result<f64, String> {
    token
        .parse::<f64>()
        .map_err(|_| format!("bad {what} '{token}'"))
}

fn parse_integer(token: &str, what: &str) -> Result<u64, String> {
    token
        .parse::<u64>()
        .map_err(|_| format!("bad {what} '{token}'"))
}

fn parse_percent(token: &str, what: &str) -> Result<f64, String> {
    let stripped = token.strip_suffix('%').unwrap_or(token);
    stripped
        .parse::<f64>()
        .map_err(|_| format!("bad {what} '{token}'"))
}

/// The two canonical header lines, newline-terminated.
pub fn header_lines() -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:>15}{:>9}{:>12}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}\n",
        "Time",
        "Speed",
        "Read",
        "Read",
        "Mapped",
        "Mapped",
        "Mapped",
        "Mapped",
        "Unmapped",
        "Unmapped",
        "Unmapped",
        "Unmapped"
    ));
    s.push_str(&format!(
        "{:>15}{:>9}{:>12}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}\n",
        "", "M/hr", "number", "length", "unique", "length", "MMrate(%)", "multi", "multi+", "MM",
        "short", "other"
    ));
    s
}

/// Formats one record as a canonical data row, newline-terminated.
///
/// The columns not present in [`ProgressRecord`] are synthesized: mapped
/// length mirrors the read length, the mismatch rate is zero, and the
/// unmapped remainder is attributed to the "short" column so each row's
/// percentages still account for 100% of reads.
pub fn format_row(record: &ProgressRecord) -> Result<String, InvariantViolation> {
    record.validate()?;
    let remainder = (100.0 - record.mapped_percent_sum()).max(0.0);
    Ok(format!(
        "{:>15}{:>9.1}{:>12}{:>9}{:>8.1}%{:>9.1}{:>8.1}%{:>8.1}%{:>8.1}%{:>8.1}%{:>8.1}%{:>8.1}%\n",
        record.timestamp.format("%b %d %H:%M:%S"),
        record.speed_mreads_per_hr,
        record.reads_processed,
        record.read_length,
        record.pct_mapped_unique,
        record.read_length as f64,
        0.0,
        record.pct_mapped_multi,
        record.pct_mapped_multi_plus,
        0.0,
        remainder,
        0.0,
    ))
}

/// Serializes records into the canonical log format (headers + rows, no
/// sentinel). `parse_progress_log` on the output reproduces the records.
pub fn serialize_progress_log(records: &[ProgressRecord]) -> Result<String, InvariantViolation> {
    let mut out = header_lines();
    for record in records {
        out.push_str(&format_row(record)?);
    }
    Ok(out)
}

/// Errors terminating a tail stream.
#[derive(Debug, Error)]
pub enum TailError {
    /// The file existed and then disappeared (or shrank) mid-run.
    #[error("progress log vanished mid-run: {path}")]
    FileVanished { path: PathBuf },
    #[error("i/o error tailing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Incremental follower for a growing `Log.progress.out`.
///
/// Yields each complete data row exactly once, in file order, polling every
/// `poll_interval`. The stream ends when the sentinel row appears, when the
/// stop flag is raised (after one final drain), or with a single
/// [`TailError`] if the file vanishes mid-run. The target file may not
/// exist yet when tailing starts.
///
/// One tailer per file; the tailer never writes.
pub struct ProgressTailer {
    path: PathBuf,
    poll_interval: Duration,
    stop: Arc<AtomicBool>,
    offset: u64,
    carry: Vec<u8>,
    seen_file: bool,
    stop_drained: bool,
    finished: bool,
    pending: VecDeque<ProgressRecord>,
    line_no: usize,
    last_reads: Option<u64>,
}

impl ProgressTailer {
    pub fn new(path: impl Into<PathBuf>, poll_interval: Duration) -> Self {
        Self::with_stop_flag(path, poll_interval, Arc::new(AtomicBool::new(false)))
    }

    /// A tailer whose stream can be ended externally by raising `stop`,
    /// typically once the log writer is known to have exited.
    pub fn with_stop_flag(
        path: impl Into<PathBuf>,
        poll_interval: Duration,
        stop: Arc<AtomicBool>,
    ) -> Self {
        Self {
            path: path.into(),
            poll_interval,
            stop,
            offset: 0,
            carry: Vec::new(),
            seen_file: false,
            stop_drained: false,
            finished: false,
            pending: VecDeque::new(),
            line_no: 0,
            last_reads: None,
        }
    }

    /// Shared flag that ends the stream when set to `true`.
    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.stop)
    }

    /// Reads newly appended bytes and queues any complete rows.
    fn drain_new_data(&mut self) -> Result<(), TailError> {
        let meta = match fs::metadata(&self.path) {
            Ok(m) => m,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                if self.seen_file {
                    return Err(TailError::FileVanished {
                        path: self.path.clone(),
                    });
                }
                return Ok(());
            }
            Err(source) => {
                return Err(TailError::Io {
                    path: self.path.clone(),
                    source,
                })
            }
        };
        self.seen_file = true;
        if meta.len() < self.offset {
            // Truncated or replaced under us; the rows we were following
            // are gone.
            return Err(TailError::FileVanished {
                path: self.path.clone(),
            });
        }
        if meta.len() == self.offset {
            return Ok(());
        }
        let mut file = fs::File::open(&self.path).map_err(|source| TailError::Io {
            path: self.path.clone(),
            source,
        })?;
        use std::io::Seek;
        file.seek(std::io::SeekFrom::Start(self.offset))
            .map_err(|source| TailError::Io {
                path: self.path.clone(),
                source,
            })?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf).map_err(|source| TailError::Io {
            path: self.path.clone(),
            source,
        })?;
        self.offset += buf.len() as u64;
        self.carry.extend_from_slice(&buf);
        self.consume_carry();
        Ok(())
    }

    /// Splits complete lines out of the carry buffer and classifies them.
    /// Bytes after the final newline stay buffered until the writer
    /// finishes the line.
    fn consume_carry(&mut self) {
        while let Some(pos) = self.carry.iter().position(|&b| b == b'\n') {
            let line_bytes: Vec<u8> = self.carry.drain(..=pos).collect();
            self.line_no += 1;
            let line = match std::str::from_utf8(&line_bytes) {
                Ok(s) => s.trim_end_matches(['\n', '\r']),
                Err(_) => {
                    log::warn!(
                        "skipping non-UTF-8 line {} in {}",
                        self.line_no,
                        self.path.display()
                    );
                    continue;
                }
            };
            match classify_line(line) {
                LineKind::Blank | LineKind::Header => {}
                LineKind::Sentinel => {
                    self.finished = true;
                    return;
                }
                LineKind::Data => match parse_row(line) {
                    Ok(rec) => {
                        if let Some(prev) = self.last_reads {
                            if rec.reads_processed < prev {
                                log::warn!(
                                    "{}: reads_processed went backwards at line {} ({} -> {})",
                                    self.path.display(),
                                    self.line_no,
                                    prev,
                                    rec.reads_processed
                                );
                            }
                        }
                        self.last_reads = Some(rec.reads_processed);
                        self.pending.push_back(rec);
                    }
                    Err(reason) => {
                        log::warn!(
                            "skipping malformed row at {}:{}: {}",
                            self.path.display(),
                            self.line_no,
                            reason
                        );
                    }
                },
            }
        }
    }
}

impl Iterator for ProgressTailer {
    type Item = Result<ProgressRecord, TailError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(rec) = self.pending.pop_front() {
                return Some(Ok(rec));
            }
            if self.finished {
                return None;
            }
            if let Err(e) = self.drain_new_data() {
                self.finished = true;
                return Some(Err(e));
            }
            if !self.pending.is_empty() || self.finished {
                continue;
            }
            if self.stop.load(Ordering::SeqCst) {
                if self.stop_drained {
                    return None;
                }
                // One more immediate drain so rows written just before the
                // stop are not lost.
                self.stop_drained = true;
                continue;
            }
            std::thread::sleep(self.poll_interval);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ts(mon: u32, day: u32, h: u32, m: u32, s: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(TIMESTAMP_YEAR, mon, day)
            .unwrap()
            .and_hms_opt(h, m, s)
            .unwrap()
    }

    fn sample_record() -> ProgressRecord {
        ProgressRecord {
            timestamp: ts(1, 1, 12, 0, 0),
            speed_mreads_per_hr: 100.0,
            reads_processed: 1_000_000,
            read_length: 100,
            pct_mapped_unique: 25.0,
            pct_mapped_multi: 4.0,
            pct_mapped_multi_plus: 0.5,
        }
    }

    #[test]
    fn parses_canonical_row() {
        let text = format!(
            "{}Jan 01 12:00:00  100.0  1000000  100  25.0%  99  0.5%  4.0%  0.5%  0.0%  60.0%  10.0%\n",
            header_lines()
        );
        let parsed = parse_progress_log(&text);
        assert!(parsed.malformed.is_empty(), "{:?}", parsed.malformed);
        assert_eq!(parsed.records.len(), 1);
        let r = &parsed.records[0];
        assert_eq!(r.reads_processed, 1_000_000);
        assert_eq!(r.read_length, 100);
        assert_eq!(r.pct_mapped_unique, 25.0);
        assert_eq!(r.pct_mapped_multi, 4.0);
        assert_eq!(r.pct_mapped_multi_plus, 0.5);
        assert_eq!(r.speed_mreads_per_hr, 100.0);
        assert_eq!(r.timestamp, ts(1, 1, 12, 0, 0));
        assert!(!parsed.complete);
    }

    #[test]
    fn empty_input_gives_empty_list() {
        let parsed = parse_progress_log("");
        assert!(parsed.records.is_empty());
        assert!(parsed.malformed.is_empty());
        assert!(!parsed.complete);
    }

    #[test]
    fn sentinel_marks_complete() {
        let text = format!("{}ALL DONE!\n", header_lines());
        let parsed = parse_progress_log(&text);
        assert!(parsed.records.is_empty());
        assert!(parsed.complete);
    }

    #[test]
    fn unterminated_last_line_is_deferred() {
        let full = format_row(&sample_record()).unwrap();
        let partial = &full[..full.len() - 10];
        let text = format!("{}{}{}", header_lines(), full, partial);
        let parsed = parse_progress_log(&text);
        assert_eq!(parsed.records.len(), 1);
        assert!(parsed.malformed.is_empty());
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let text = format!("{}this is not a progress row at all\n", header_lines());
        let parsed = parse_progress_log(&text);
        assert_eq!(parsed.malformed.len(), 1);
        assert_eq!(parsed.malformed[0].line, 3);
        assert!(parsed.clone().strict().is_err());
    }

    #[test]
    fn short_row_is_malformed() {
        let text = "Jan 01 12:00:00  100.0  1000  100  25.0%\n";
        let parsed = parse_progress_log(text);
        assert_eq!(parsed.malformed.len(), 1);
        assert!(parsed.records.is_empty());
    }

    #[test]
    fn extra_trailing_columns_are_ignored() {
        let text = "Jan 01 12:00:00  100.0  1000  100  25.0%  99  0.5%  4.0%  0.5%  0.0%  60.0%  10.0%  extra  1.2%\n";
        let parsed = parse_progress_log(text);
        assert_eq!(parsed.records.len(), 1);
        assert!(parsed.malformed.is_empty());
    }

    #[test]
    fn bare_percent_columns_accepted() {
        // Tolerates percent columns without the '%' suffix.
        let text = "Jan 01 12:00:00  100.0  1000  100  25.0  99  0.5  4.0  0.5\n";
        let parsed = parse_progress_log(text);
        assert_eq!(parsed.records.len(), 1);
    }

    #[test]
    fn out_of_range_percent_is_malformed() {
        let text = "Jan 01 12:00:00  100.0  1000  100  125.0%  99  0.5%  4.0%  0.5%\n";
        let parsed = parse_progress_log(text);
        assert_eq!(parsed.malformed.len(), 1);
    }

    #[test]
    fn non_monotonic_reads_warns_but_parses() {
        let mut r1 = sample_record();
        r1.reads_processed = 2000;
        let mut r2 = sample_record();
        r2.reads_processed = 1000;
        let text = serialize_progress_log(&[r1, r2]).unwrap();
        let parsed = parse_progress_log(&text);
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.warnings.len(), 1);
        match &parsed.warnings[0] {
            ParseWarning::NonMonotonicReads {
                previous, current, ..
            } => {
                assert_eq!(*previous, 2000);
                assert_eq!(*current, 1000);
            }
        }
    }

    #[test]
    fn serialize_empty_is_headers_only() {
        let text = serialize_progress_log(&[]).unwrap();
        assert_eq!(text, header_lines());
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn serialized_row_has_twelve_columns() {
        let row = format_row(&sample_record()).unwrap();
        // Three timestamp tokens plus eleven values.
        assert_eq!(row.split_whitespace().count(), 14);
        let percent_tokens = row
            .split_whitespace()
            .filter(|t| t.ends_with('%'))
            .count();
        assert_eq!(percent_tokens, 7);
    }

    #[test]
    fn serialize_rejects_invalid_record() {
        let mut r = sample_record();
        r.pct_mapped_unique = 150.0;
        assert!(serialize_progress_log(&[r]).is_err());
    }

    #[test]
    fn round_trip_identity() {
        let records = vec![
            sample_record(),
            ProgressRecord {
                timestamp: ts(2, 29, 23, 59, 59),
                speed_mreads_per_hr: 319.1,
                reads_processed: 5_311_614,
                read_length: 98,
                pct_mapped_unique: 96.7,
                pct_mapped_multi: 2.2,
                pct_mapped_multi_plus: 0.1,
            },
        ];
        let text = serialize_progress_log(&records).unwrap();
        let parsed = parse_progress_log(&text);
        assert!(parsed.malformed.is_empty());
        assert_eq!(parsed.records, records);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            /// Records with one-decimal percentages so the serialized text
            /// preserves them exactly.
            pub(crate) fn arb_record()(
                mon in 1u32..=12,
                day in 1u32..=28,
                h in 0u32..24,
                m in 0u32..60,
                s in 0u32..60,
                speed_tenths in 0u64..100_000,
                reads in 0u64..100_000_000_000,
                read_length in 0u64..100_000,
                unique_tenths in 0u32..=1000,
                multi_tenths in 0u32..=1000,
                plus_tenths in 0u32..=1000,
            ) -> ProgressRecord {
                // Rescale so the three percentages never exceed 100.
                let total = unique_tenths + multi_tenths + plus_tenths;
                let (u, mu, pl) = if total > 1000 {
                    let clamp = |t: u32| (t as u64 * 1000 / total as u64) as u32;
                    (clamp(unique_tenths), clamp(multi_tenths), clamp(plus_tenths))
                } else {
                    (unique_tenths, multi_tenths, plus_tenths)
                };
                ProgressRecord {
                    timestamp: ts(mon, day, h, m, s),
                    speed_mreads_per_hr: speed_tenths as f64 / 10.0,
                    reads_processed: reads,
                    read_length,
                    pct_mapped_unique: u as f64 / 10.0,
                    pct_mapped_multi: mu as f64 / 10.0,
                    pct_mapped_multi_plus: pl as f64 / 10.0,
                }
            }
        }

        proptest! {
            #[test]
            fn round_trip(records in proptest::collection::vec(arb_record(), 0..40)) {
                let text = serialize_progress_log(&records).unwrap();
                let parsed = parse_progress_log(&text);
                prop_assert!(parsed.malformed.is_empty());
                prop_assert_eq!(parsed.records, records);
            }
        }
    }

    mod tailing {
        use super::*;
        use std::io::Write;

        #[test]
        fn tails_file_created_late_with_appends() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("Log.progress.out");
            let writer_path = path.clone();
            let writer = std::thread::spawn(move || {
                std::thread::sleep(Duration::from_millis(30));
                let mut f = fs::File::create(&writer_path).unwrap();
                f.write_all(header_lines().as_bytes()).unwrap();
                for i in 1..=3u64 {
                    let mut r = sample_record();
                    r.reads_processed = i * 1000;
                    f.write_all(format_row(&r).unwrap().as_bytes()).unwrap();
                    f.flush().unwrap();
                    std::thread::sleep(Duration::from_millis(15));
                }
                writeln!(f, "{SENTINEL}").unwrap();
            });
            let tailer = ProgressTailer::new(&path, Duration::from_millis(5));
            let got: Vec<u64> = tailer.map(|r| r.unwrap().reads_processed).collect();
            writer.join().unwrap();
            assert_eq!(got, vec![1000, 2000, 3000]);
        }

        #[test]
        fn complete_file_streams_then_ends() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("log");
            let mut records = Vec::new();
            for i in 1..=5u64 {
                let mut r = sample_record();
                r.reads_processed = i;
                records.push(r);
            }
            let mut text = serialize_progress_log(&records).unwrap();
            text.push_str(SENTINEL);
            text.push('\n');
            fs::write(&path, &text).unwrap();
            let tailer = ProgressTailer::new(&path, Duration::from_millis(5));
            let got: Vec<u64> = tailer.map(|r| r.unwrap().reads_processed).collect();
            assert_eq!(got, vec![1, 2, 3, 4, 5]);
        }

        #[test]
        fn partial_write_yields_once_after_newline() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("log");
            fs::write(&path, header_lines()).unwrap();
            let row = format_row(&sample_record()).unwrap();
            let (first, second) = row.split_at(row.len() / 2);

            let stop = Arc::new(AtomicBool::new(false));
            let tailer =
                ProgressTailer::with_stop_flag(&path, Duration::from_millis(5), stop.clone());
            let collector = std::thread::spawn(move || {
                tailer.map(|r| r.unwrap()).collect::<Vec<_>>()
            });

            let mut f = fs::OpenOptions::new().append(true).open(&path).unwrap();
            f.write_all(first.as_bytes()).unwrap();
            f.flush().unwrap();
            std::thread::sleep(Duration::from_millis(40));
            f.write_all(second.as_bytes()).unwrap();
            f.flush().unwrap();
            std::thread::sleep(Duration::from_millis(40));
            stop.store(true, Ordering::SeqCst);
            let got = collector.join().unwrap();
            assert_eq!(got.len(), 1);
            assert_eq!(got[0], sample_record());
        }

        #[test]
        fn vanished_file_ends_stream_with_error() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("log");
            let mut text = header_lines();
            text.push_str(&format_row(&sample_record()).unwrap());
            fs::write(&path, &text).unwrap();

            let mut tailer = ProgressTailer::new(&path, Duration::from_millis(5));
            assert!(tailer.next().unwrap().is_ok());
            fs::remove_file(&path).unwrap();
            match tailer.next() {
                Some(Err(TailError::FileVanished { .. })) => {}
                other => panic!("expected FileVanished, got {other:?}"),
            }
            assert!(tailer.next().is_none());
        }

        #[test]
        fn stop_before_file_exists_ends_cleanly() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("never-created");
            let stop = Arc::new(AtomicBool::new(true));
            let mut tailer =
                ProgressTailer::with_stop_flag(&path, Duration::from_millis(5), stop);
            assert!(tailer.next().is_none());
        }

        #[test]
        fn tail_matches_one_shot_parse() {
            // Rows arrive in randomly sized write chunks; the tailed stream
            // must equal the final one-shot parse.
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            let mut records = Vec::new();
            for i in 0..25u64 {
                let mut r = sample_record();
                r.reads_processed = i * 10;
                records.push(r);
            }
            let mut text = serialize_progress_log(&records).unwrap();
            text.push_str(SENTINEL);
            text.push('\n');

            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("log");
            let bytes = text.into_bytes();
            let writer_path = path.clone();
            let chunks: Vec<Vec<u8>> = {
                let mut chunks = Vec::new();
                let mut rest = bytes.as_slice();
                while !rest.is_empty() {
                    let n = rng.gen_range(1..=rest.len().min(97));
                    chunks.push(rest[..n].to_vec());
                    rest = &rest[n..];
                }
                chunks
            };
            let writer = std::thread::spawn(move || {
                let mut f = fs::File::create(&writer_path).unwrap();
                for c in chunks {
                    f.write_all(&c).unwrap();
                    f.flush().unwrap();
                    std::thread::sleep(Duration::from_millis(2));
                }
            });
            let tailer = ProgressTailer::new(&path, Duration::from_millis(1));
            let got: Vec<ProgressRecord> = tailer.map(|r| r.unwrap()).collect();
            writer.join().unwrap();

            let parsed = parse_progress_log(&fs::read_to_string(&path).unwrap());
            assert_eq!(got, parsed.records);
            assert_eq!(got, records);
        }
    }
}
