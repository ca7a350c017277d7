//! Early termination of alignments whose mapping rate is poor.
//!
//! The policy reproduces the two-threshold rule used to cut fleet cost:
//! let an alignment run until at least a minimum fraction of its reads has
//! been processed, then check the mapping rate once. If the rate is below
//! the minimum the run is killed; otherwise it is never judged again. The
//! defaults (10% of reads, 30% mapped) keep the check cheap while the
//! savings from killing hopeless runs early are large.
//!
//! [`evaluate`] is the pure per-record rule; [`watch`] folds it over a
//! stream of progress records and fires an abort callback on a terminate
//! decision.

use serde::{Deserialize, Serialize};

use crate::progress::{ProgressRecord, TailError};

/// Which mapped-percentage columns count toward the mapping rate.
/// All three by default, so the rate reflects reads mapped anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateColumns {
    pub unique: bool,
    pub multi: bool,
    pub multi_plus: bool,
}

impl Default for RateColumns {
    fn default() -> Self {
        Self {
            unique: true,
            multi: true,
            multi_plus: true,
        }
    }
}

/// Thresholds and cadence for the early-stop check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EarlyStopPolicy {
    /// Fraction of total reads that must be processed before the rate is
    /// judged. Below this the run always continues.
    pub min_processed_fraction: f64,
    /// Minimum acceptable mapping rate at the gate, as a fraction.
    pub min_mapping_rate: f64,
    /// How often a live log is polled, in seconds.
    pub poll_interval_secs: f64,
    /// When false, runs are never judged at all.
    pub enabled: bool,
    pub rate_columns: RateColumns,
}

impl Default for EarlyStopPolicy {
    fn default() -> Self {
        Self {
            min_processed_fraction: 0.10,
            min_mapping_rate: 0.30,
            poll_interval_secs: 10.0,
            enabled: true,
            rate_columns: RateColumns::default(),
        }
    }
}

impl EarlyStopPolicy {
    pub fn poll_interval(&self) -> std::time::Duration {
        std::time::Duration::from_secs_f64(self.poll_interval_secs.max(0.0))
    }

    /// Mapping rate of a record under this policy's column selection, as a
    /// fraction in `[0, ~1]`.
    pub fn mapping_rate(&self, record: &ProgressRecord) -> f64 {
        let mut pct = 0.0;
        if self.rate_columns.unique {
            pct += record.pct_mapped_unique;
        }
        if self.rate_columns.multi {
            pct += record.pct_mapped_multi;
        }
        if self.rate_columns.multi_plus {
            pct += record.pct_mapped_multi_plus;
        }
        pct / 100.0
    }

    /// Rejects thresholds that cannot make sense.
    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(self.min_processed_fraction > 0.0 && self.min_processed_fraction <= 1.0) {
            return Err(PolicyError::BadFraction(self.min_processed_fraction));
        }
        if !(self.min_mapping_rate >= 0.0 && self.min_mapping_rate <= 1.0) {
            return Err(PolicyError::BadRate(self.min_mapping_rate));
        }
        if !(self.poll_interval_secs > 0.0) {
            return Err(PolicyError::BadPollInterval(self.poll_interval_secs));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PolicyError {
    #[error("min_processed_fraction {0} must be in (0, 1]")]
    BadFraction(f64),
    #[error("min_mapping_rate {0} must be in [0, 1]")]
    BadRate(f64),
    #[error("poll_interval_secs {0} must be positive")]
    BadPollInterval(f64),
}

/// What to do with a run after seeing one progress record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    /// Too early to judge; keep waiting.
    Continue,
    /// The gate was reached and the rate is acceptable. Judged once, final.
    Pass,
    /// The gate was reached and the rate is too low. Kill the run.
    Terminate {
        observed_mapping_rate: f64,
        processed_fraction: f64,
    },
}

/// The one-shot early-stop rule for a single record.
///
/// The processed-fraction gate is inclusive (`fraction >= min`) and the
/// rate cut is strict (`rate < min`), so a run sitting exactly on either
/// threshold is allowed through.
pub fn evaluate(policy: &EarlyStopPolicy, total_reads: u64, record: &ProgressRecord) -> Decision {
    let fraction = if total_reads == 0 {
        1.0
    } else {
        record.reads_processed as f64 / total_reads as f64
    };
    if fraction < policy.min_processed_fraction {
        return Decision::Continue;
    }
    let rate = policy.mapping_rate(record);
    if rate < policy.min_mapping_rate {
        Decision::Terminate {
            observed_mapping_rate: rate,
            processed_fraction: fraction,
        }
    } else {
        Decision::Pass
    }
}

/// Terminal state of a watched run.
#[derive(Debug)]
pub enum WatchOutcome {
    /// The run reached the gate with an acceptable rate and was left alone.
    PassedGate {
        observed_mapping_rate: f64,
        processed_fraction: f64,
    },
    /// The run was judged hopeless; the abort callback has been invoked.
    TerminatedLowMapRate {
        observed_mapping_rate: f64,
        processed_fraction: f64,
    },
    /// The record stream ended before the gate was reached, or the policy
    /// was disabled. No judgement was made and the run was not touched.
    CompletedUnjudged,
    /// The record stream failed. The run was not touched.
    WatchFailed(TailError),
}

/// Supervises one alignment through its progress-record stream.
///
/// Applies [`evaluate`] to each record until a final decision lands. On
/// `Terminate` the `abort` callback runs exactly once, before returning;
/// on `Pass` the rest of the stream is ignored and the run continues
/// unsupervised. Stream errors never abort the run.
pub fn watch<I, F>(
    policy: &EarlyStopPolicy,
    total_reads: u64,
    records: I,
    abort: F,
) -> WatchOutcome
where
    I: IntoIterator<Item = Result<ProgressRecord, TailError>>,
    F: FnOnce(),
{
    if !policy.enabled {
        return WatchOutcome::CompletedUnjudged;
    }
    for item in records {
        let record = match item {
            Ok(r) => r,
            Err(e) => return WatchOutcome::WatchFailed(e),
        };
        match evaluate(policy, total_reads, &record) {
            Decision::Continue => {}
            Decision::Pass => {
                return WatchOutcome::PassedGate {
                    observed_mapping_rate: policy.mapping_rate(&record),
                    processed_fraction: if total_reads == 0 {
                        1.0
                    } else {
                        record.reads_processed as f64 / total_reads as f64
                    },
                }
            }
            Decision::Terminate {
                observed_mapping_rate,
                processed_fraction,
            } => {
                abort();
                return WatchOutcome::TerminatedLowMapRate {
                    observed_mapping_rate,
                    processed_fraction,
                };
            }
        }
    }
    WatchOutcome::CompletedUnjudged
}
