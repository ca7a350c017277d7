//! Offline accounting over trace corpora and recorded worker results:
//! how much compute early stopping saves, and how much faster one setup
//! is than another when runs are weighted by input size.
//!
//! Savings come in two flavors that are deliberately kept apart. The
//! analytic flavor assumes a terminated run stops at exactly the gate
//! fraction, which makes it bit-compatible with the fleet simulator.
//! The recorded flavor reads worker results as they happened, polling
//! quantization included, so the gap between model and practice stays
//! visible instead of being averaged away.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::earlystop::EarlyStopPolicy;
use crate::simalign::RunTrace;
use crate::worker::{JobResult, JobStatus};

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("corpus has no jobs to account")]
    EmptyCorpus,
    #[error("aggregate out of range: {reason}")]
    RangeError { reason: String },
    #[error("no full-duration oracle for terminated job {job_id}")]
    MissingOracle { job_id: String },
    #[error("weights sum to zero")]
    ZeroWeightSum,
    #[error("row {row}: times must be positive")]
    NonpositiveTime { row: usize },
    #[error("row {row}: weight must be a finite non-negative number")]
    NegativeWeight { row: usize },
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
    #[error("cannot read speedup rows: {0}")]
    SpeedupCsv(#[from] csv::Error),
}

/// Aggregate compute accounting for one corpus under one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub n_jobs: usize,
    pub n_terminated: usize,
    /// What the corpus would cost with every run going to completion.
    pub total_full_seconds: f64,
    /// What it costs with terminations applied.
    pub actual_seconds: f64,
    pub saved_seconds: f64,
    /// saved / full; exactly 1.0 only on degenerate input.
    pub saved_fraction: f64,
    pub corpus_label: String,
    /// Set when the numbers are formally valid but outside the useful
    /// range, e.g. savings equal to the entire corpus.
    pub degenerate: bool,
}

impl SavingsReport {
    fn assemble(
        n_jobs: usize,
        n_terminated: usize,
        total_full_seconds: f64,
        actual_seconds: f64,
        corpus_label: &str,
    ) -> SavingsReport {
        let saved_seconds = total_full_seconds - actual_seconds;
        let saved_fraction = if total_full_seconds > 0.0 {
            saved_seconds / total_full_seconds
        } else {
            0.0
        };
        let degenerate = !(saved_fraction < 1.0) || total_full_seconds <= 0.0;
        if degenerate {
            log::warn!(
                "degenerate savings report for {corpus_label}: \
                 saved {saved_seconds}s of {total_full_seconds}s"
            );
        }
        SavingsReport {
            n_jobs,
            n_terminated,
            total_full_seconds,
            actual_seconds,
            saved_seconds,
            saved_fraction,
            corpus_label: corpus_label.to_string(),
            degenerate,
        }
    }
}

impl fmt::Display for SavingsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "savings report ({})", self.corpus_label)?;
        writeln!(
            f,
            "  jobs:           {} total, {} terminated early",
            self.n_jobs, self.n_terminated
        )?;
        writeln!(
            f,
            "  full compute:   {:.2} h",
            self.total_full_seconds / 3600.0
        )?;
        writeln!(f, "  actual compute: {:.2} h", self.actual_seconds / 3600.0)?;
        write!(
            f,
            "  saved:          {:.2} h ({})",
            self.saved_seconds / 3600.0,
            percent_display(self.saved_fraction)
        )?;
        if self.degenerate {
            write!(f, "\n  warning: degenerate savings fraction")?;
        }
        Ok(())
    }
}

/// Formats a fraction as a percentage with one decimal place, rounding
/// half up, e.g. 0.19512 becomes "19.5%".
pub fn percent_display(fraction: f64) -> String {
    let percent = fraction * 100.0;
    let rounded = (percent * 10.0 + 0.5).floor() / 10.0;
    format!("{rounded:.1}%")
}

/// Analytic savings over a trace corpus: a run whose final mapping rate
/// falls below the policy threshold is charged exactly the gate
/// fraction of its full duration. Matches the fleet simulator's
/// accounting term for term.
pub fn savings_report(
    traces: &[RunTrace],
    policy: &EarlyStopPolicy,
    corpus_label: &str,
) -> Result<SavingsReport, AnalyzerError> {
    policy.validate().map_err(|e| AnalyzerError::InvalidInput {
        reason: e.to_string(),
    })?;
    if traces.is_empty() {
        return Err(AnalyzerError::EmptyCorpus);
    }
    let mut total_full = 0.0f64;
    let mut actual = 0.0f64;
    let mut n_terminated = 0usize;
    for trace in traces {
        trace.validate().map_err(|e| AnalyzerError::InvalidInput {
            reason: e.to_string(),
        })?;
        let full = trace.duration_seconds();
        let stopped = policy.enabled && trace.final_mapping_rate() < policy.min_mapping_rate;
        total_full += full;
        actual += if stopped {
            n_terminated += 1;
            policy.min_processed_fraction * full
        } else {
            full
        };
    }
    Ok(SavingsReport::assemble(
        traces.len(),
        n_terminated,
        total_full,
        actual,
        corpus_label,
    ))
}

/// Builds a report from already-aggregated numbers, e.g. figures quoted
/// from an external run.
pub fn savings_from_aggregates(
    total_full_hours: f64,
    saved_hours: f64,
    n_jobs: usize,
    n_terminated: usize,
) -> Result<SavingsReport, AnalyzerError> {
    let range = |reason: &str| {
        Err(AnalyzerError::RangeError {
            reason: reason.to_string(),
        })
    };
    if !(total_full_hours > 0.0) || !total_full_hours.is_finite() {
        return range("total full hours must be positive and finite");
    }
    if !(saved_hours >= 0.0) || !saved_hours.is_finite() {
        return range("saved hours must be non-negative and finite");
    }
    if saved_hours > total_full_hours {
        return range("saved hours cannot exceed total full hours");
    }
    if n_terminated > n_jobs {
        return range("terminated count cannot exceed job count");
    }
    let total_full_seconds = total_full_hours * 3600.0;
    let saved_seconds = saved_hours * 3600.0;
    Ok(SavingsReport::assemble(
        n_jobs,
        n_terminated,
        total_full_seconds,
        total_full_seconds - saved_seconds,
        "aggregate",
    ))
}

/// Default full-duration oracle for recorded results: extrapolates from
/// the elapsed time and the fraction processed at the stop point.
pub fn extrapolated_full_duration(result: &JobResult) -> Option<f64> {
    let elapsed = result.align_elapsed;
    let fraction = result.processed_fraction_at_stop;
    if fraction > 0.0 && fraction.is_finite() && elapsed.is_finite() && elapsed >= 0.0 {
        Some(elapsed / fraction)
    } else {
        None
    }
}

/// Savings as actually realized by recorded worker runs. Completed runs
/// count their elapsed alignment time as both full and actual cost;
/// terminated runs take their full duration from `full_oracle`, which
/// may consult the original trace or fall back to
/// [`extrapolated_full_duration`]. Failed runs carry no usable timing
/// and are skipped. An oracle answer below the recorded elapsed time is
/// clamped up to it so a mismatched timebase cannot produce negative
/// savings.
pub fn savings_from_results<F>(
    results: &[JobResult],
    full_oracle: F,
    corpus_label: &str,
) -> Result<SavingsReport, AnalyzerError>
where
    F: Fn(&JobResult) -> Option<f64>,
{
    let mut total_full = 0.0f64;
    let mut actual = 0.0f64;
    let mut n_jobs = 0usize;
    let mut n_terminated = 0usize;
    for result in results {
        let missing = || AnalyzerError::MissingOracle {
            job_id: result.job_id.clone(),
        };
        let elapsed = result.align_elapsed;
        match result.status {
            JobStatus::Failed => continue,
            JobStatus::Completed => {
                if !(elapsed >= 0.0) || !elapsed.is_finite() {
                    return Err(missing());
                }
                total_full += elapsed;
                actual += elapsed;
                n_jobs += 1;
            }
            JobStatus::TerminatedLowMapRate => {
                if !(elapsed >= 0.0) || !elapsed.is_finite() {
                    return Err(missing());
                }
                let full = full_oracle(result).ok_or_else(missing)?;
                if !full.is_finite() {
                    return Err(missing());
                }
                total_full += full.max(elapsed);
                actual += elapsed;
                n_jobs += 1;
                n_terminated += 1;
            }
        }
    }
    if n_jobs == 0 {
        return Err(AnalyzerError::EmptyCorpus);
    }
    Ok(SavingsReport::assemble(
        n_jobs,
        n_terminated,
        total_full,
        actual,
        corpus_label,
    ))
}

/// One measured pair of runtimes with its weight, e.g. FASTQ bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub weight: f64,
    pub time_base: f64,
    pub time_variant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedupEstimator {
    /// Weighted arithmetic mean of per-row base/variant ratios.
    WeightedMean,
    /// Ratio of weighted time sums; less sensitive to small rows.
    RatioOfSums,
}

impl SpeedupEstimator {
    pub fn estimate(&self, rows: &[SpeedupRow]) -> Result<f64, AnalyzerError> {
        for (i, row) in rows.iter().enumerate() {
            if !(row.weight >= 0.0) || !row.weight.is_finite() {
                return Err(AnalyzerError::NegativeWeight { row: i });
            }
            if !(row.time_base > 0.0 && row.time_base.is_finite())
                || !(row.time_variant > 0.0 && row.time_variant.is_finite())
            {
                return Err(AnalyzerError::NonpositiveTime { row: i });
            }
        }
        let weight_sum: f64 = rows.iter().map(|r| r.weight).sum();
        if !(weight_sum > 0.0) {
            return Err(AnalyzerError::ZeroWeightSum);
        }
        Ok(match self {
            SpeedupEstimator::WeightedMean => {
                let mut numerator = 0.0f64;
                for row in rows {
                    numerator += row.weight * (row.time_base / row.time_variant);
                }
                numerator / weight_sum
            }
            SpeedupEstimator::RatioOfSums => {
                let mut base = 0.0f64;
                let mut variant = 0.0f64;
                for row in rows {
                    base += row.weight * row.time_base;
                    variant += row.weight * row.time_variant;
                }
                base / variant
            }
        })
    }
}

/// Weighted mean speedup, the default estimator.
pub fn weighted_speedup(rows: &[SpeedupRow]) -> Result<f64, AnalyzerError> {
    SpeedupEstimator::WeightedMean.estimate(rows)
}

/// Reads speedup rows from a CSV file with a `weight,time_base,time_variant`
/// header.
pub fn read_speedup_csv(path: &Path) -> Result<Vec<SpeedupRow>, AnalyzerError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleetsim::{compare_scenarios, FleetScenario};
    use crate::simalign::{synthetic_corpus, MappingTriple};
    use crate::worker::StageTimings;
    use chrono::Utc;

    fn trace(sra: &str, hours: f64, rate: f64) -> RunTrace {
        let speed = 100.0;
        RunTrace {
            sra_id: sra.to_string(),
            total_reads: (hours * speed * 1e6) as u64,
            read_length: 100,
            speed_mreads_per_hr: speed,
            final_mapping: MappingTriple {
                unique: rate * 100.0,
                multi: 0.0,
                multi_plus: 0.0,
            },
            rate_profile: Vec::new(),
            fastq_size_bytes: 0,
        }
    }

    fn result(job: &str, status: JobStatus, elapsed: f64, fraction: f64) -> JobResult {
        JobResult {
            job_id: job.to_string(),
            sra_id: job.to_string(),
            status,
            stage_timings: StageTimings::default(),
            align_elapsed: elapsed,
            observed_mapping_rate: 0.0,
            processed_fraction_at_stop: fraction,
            unjudged: false,
            started_at: Utc::now(),
            finished_at: Utc::now(),
        }
    }

    #[test]
    fn hand_oracle_three_traces() {
        let traces = vec![
            trace("A", 10.0, 0.80),
            trace("B", 10.0, 0.20),
            trace("C", 5.0, 0.50),
        ];
        let report =
            savings_report(&traces, &EarlyStopPolicy::default(), "hand oracle").unwrap();
        assert_eq!(report.n_jobs, 3);
        assert_eq!(report.n_terminated, 1);
        assert_eq!(report.saved_seconds, 9.0 * 3600.0);
        assert_eq!(report.saved_fraction, 0.36);
        assert!(!report.degenerate);
    }

    #[test]
    fn all_passing_corpus_saves_nothing() {
        let traces = vec![trace("A", 2.0, 0.9), trace("B", 3.0, 0.31)];
        let report = savings_report(&traces, &EarlyStopPolicy::default(), "x").unwrap();
        assert_eq!(report.n_terminated, 0);
        assert_eq!(report.saved_seconds, 0.0);
        assert_eq!(report.saved_fraction, 0.0);
    }

    #[test]
    fn unit_stop_fraction_saves_nothing() {
        let mut policy = EarlyStopPolicy::default();
        policy.min_processed_fraction = 1.0;
        let traces = vec![trace("A", 2.0, 0.05), trace("B", 3.0, 0.9)];
        let report = savings_report(&traces, &policy, "x").unwrap();
        assert_eq!(report.n_terminated, 1);
        assert_eq!(report.saved_seconds, 0.0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let err = savings_report(&[], &EarlyStopPolicy::default(), "x").unwrap_err();
        assert!(matches!(err, AnalyzerError::EmptyCorpus));
    }

    #[test]
    fn aggregate_headline_arithmetic() {
        let report = savings_from_aggregates(155.8, 30.4, 1000, 38).unwrap();
        assert_eq!(report.n_jobs, 1000);
        assert_eq!(report.n_terminated, 38);
        assert_eq!(report.total_full_seconds, 155.8 * 3600.0);
        assert_eq!(report.actual_seconds, 155.8 * 3600.0 - 30.4 * 3600.0);
        assert!((report.saved_fraction - 0.19512195121951217).abs() < 1e-15);
        assert_eq!(percent_display(report.saved_fraction), "19.5%");
        let text = report.to_string();
        assert!(text.contains("19.5%"), "display was: {text}");
        assert!(text.contains("30.40 h"), "display was: {text}");
        assert!(!report.degenerate);
    }

    #[test]
    fn aggregate_boundary_is_degenerate_not_an_error() {
        let report = savings_from_aggregates(10.0, 10.0, 1, 1).unwrap();
        assert_eq!(report.saved_fraction, 1.0);
        assert!(report.degenerate);
        assert!(report.to_string().contains("degenerate"));
    }

    #[test]
    fn aggregate_range_errors() {
        let is_range = |r: Result<SavingsReport, AnalyzerError>| {
            matches!(r.unwrap_err(), AnalyzerError::RangeError { .. })
        };
        assert!(is_range(savings_from_aggregates(0.0, 0.0, 1, 0)));
        assert!(is_range(savings_from_aggregates(-5.0, 0.0, 1, 0)));
        assert!(is_range(savings_from_aggregates(10.0, -1.0, 1, 0)));
        assert!(is_range(savings_from_aggregates(10.0, 11.0, 1, 0)));
        assert!(is_range(savings_from_aggregates(10.0, 1.0, 1, 2)));
    }

    #[test]
    fn zero_percent_display() {
        let report = savings_from_aggregates(100.0, 0.0, 10, 0).unwrap();
        assert_eq!(percent_display(report.saved_fraction), "0.0%");
    }

    #[test]
    fn results_completed_only_saves_zero() {
        let results = vec![
            result("a", JobStatus::Completed, 120.0, 1.0),
            result("b", JobStatus::Completed, 80.0, 1.0),
        ];
        let report =
            savings_from_results(&results, extrapolated_full_duration, "run").unwrap();
        assert_eq!(report.n_jobs, 2);
        assert_eq!(report.saved_seconds, 0.0);
        assert_eq!(report.saved_fraction, 0.0);
    }

    #[test]
    fn results_terminated_extrapolates_full_duration() {
        let results = vec![result(
            "a",
            JobStatus::TerminatedLowMapRate,
            360.0,
            0.1,
        )];
        let report =
            savings_from_results(&results, extrapolated_full_duration, "run").unwrap();
        assert_eq!(report.total_full_seconds, 3600.0);
        assert_eq!(report.actual_seconds, 360.0);
        assert_eq!(report.n_terminated, 1);
        assert!((report.saved_fraction - 0.9).abs() < 1e-12);
    }

    #[test]
    fn results_without_oracle_error() {
        let results = vec![result("a", JobStatus::TerminatedLowMapRate, 360.0, 0.0)];
        let err =
            savings_from_results(&results, extrapolated_full_duration, "run").unwrap_err();
        assert!(matches!(err, AnalyzerError::MissingOracle { job_id } if job_id == "a"));
    }

    #[test]
    fn failed_results_are_skipped() {
        let results = vec![
            result("a", JobStatus::Failed, 0.0, 0.0),
            result("b", JobStatus::Completed, 50.0, 1.0),
        ];
        let report =
            savings_from_results(&results, extrapolated_full_duration, "run").unwrap();
        assert_eq!(report.n_jobs, 1);

        let only_failed = vec![result("a", JobStatus::Failed, 0.0, 0.0)];
        let err =
            savings_from_results(&only_failed, extrapolated_full_duration, "run").unwrap_err();
        assert!(matches!(err, AnalyzerError::EmptyCorpus));
    }

    #[test]
    fn short_oracle_is_clamped_to_elapsed() {
        let results = vec![result(
            "a",
            JobStatus::TerminatedLowMapRate,
            500.0,
            0.1,
        )];
        let report = savings_from_results(&results, |_| Some(100.0), "run").unwrap();
        assert_eq!(report.total_full_seconds, 500.0);
        assert_eq!(report.saved_seconds, 0.0);
    }

    #[test]
    fn analytic_savings_match_fleet_delta_exactly() {
        for (seed, overhead) in [(55u64, 0.0f64), (56, 317.5)] {
            let traces = synthetic_corpus(seed, 80, 20);
            let policy = EarlyStopPolicy::default();
            let report = savings_report(&traces, &policy, "synthetic").unwrap();
            let with_stop = FleetScenario {
                traces: traces.clone(),
                worker_count: 6,
                policy: policy.clone(),
                fixed_setup_seconds: overhead,
                ..FleetScenario::default()
            };
            let mut without = with_stop.clone();
            without.policy.enabled = false;
            let cmp = compare_scenarios(&without, &with_stop).unwrap();
            assert_eq!(report.saved_seconds, cmp.compute_seconds_saved);
            assert_eq!(report.total_full_seconds, cmp.base.total_job_seconds);
            assert_eq!(report.actual_seconds, cmp.variant.total_job_seconds);
        }
    }

    #[test]
    fn weighted_speedup_worked_example() {
        let rows = vec![
            SpeedupRow {
                weight: 2.0,
                time_base: 100.0,
                time_variant: 10.0,
            },
            SpeedupRow {
                weight: 6.0,
                time_base: 140.0,
                time_variant: 10.0,
            },
        ];
        assert_eq!(weighted_speedup(&rows).unwrap(), 13.0);
    }

    #[test]
    fn uniform_ratio_collapses_to_that_ratio() {
        let rows: Vec<SpeedupRow> = (1..=5)
            .map(|i| SpeedupRow {
                weight: i as f64 * 1.7,
                time_base: 42.0 * i as f64,
                time_variant: 10.5 * i as f64,
            })
            .collect();
        assert!((weighted_speedup(&rows).unwrap() - 4.0).abs() < 1e-12);
        assert!(
            (SpeedupEstimator::RatioOfSums.estimate(&rows).unwrap() - 4.0).abs() < 1e-12
        );
    }

    #[test]
    fn estimators_diverge_on_skewed_rows() {
        let rows = vec![
            SpeedupRow {
                weight: 1.0,
                time_base: 100.0,
                time_variant: 1.0,
            },
            SpeedupRow {
                weight: 1.0,
                time_base: 10.0,
                time_variant: 10.0,
            },
        ];
        let mean = SpeedupEstimator::WeightedMean.estimate(&rows).unwrap();
        let ratio = SpeedupEstimator::RatioOfSums.estimate(&rows).unwrap();
        assert_eq!(mean, 50.5);
        assert_eq!(ratio, 10.0);
    }

    #[test]
    fn speedup_input_errors() {
        let row = |w: f64, b: f64, v: f64| SpeedupRow {
            weight: w,
            time_base: b,
            time_variant: v,
        };
        assert!(matches!(
            weighted_speedup(&[row(0.0, 1.0, 1.0)]).unwrap_err(),
            AnalyzerError::ZeroWeightSum
        ));
        assert!(matches!(
            weighted_speedup(&[]).unwrap_err(),
            AnalyzerError::ZeroWeightSum
        ));
        assert!(matches!(
            weighted_speedup(&[row(1.0, 0.0, 1.0)]).unwrap_err(),
            AnalyzerError::NonpositiveTime { row: 0 }
        ));
        assert!(matches!(
            weighted_speedup(&[row(1.0, 1.0, 1.0), row(-1.0, 1.0, 1.0)]).unwrap_err(),
            AnalyzerError::NegativeWeight { row: 1 }
        ));
    }

    #[test]
    fn estimate_matches_brute_force_sum() {
        let mut rows = Vec::new();
        for i in 1..=200u32 {
            rows.push(SpeedupRow {
                weight: (i % 17) as f64 + 0.25,
                time_base: 100.0 + (i as f64).sin().abs() * 900.0,
                time_variant: 5.0 + (i as f64).cos().abs() * 95.0,
            });
        }
        let mut numerator = 0.0f64;
        let mut weight_sum = 0.0f64;
        for row in &rows {
            numerator += row.weight * (row.time_base / row.time_variant);
            weight_sum += row.weight;
        }
        assert_eq!(weighted_speedup(&rows).unwrap(), numerator / weight_sum);
    }

    #[test]
    fn speedup_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        std::fs::write(
            &path,
            "weight,time_base,time_variant\n2.0,100.0,10.0\n6.0,140.0,10.0\n",
        )
        .unwrap();
        let rows = read_speedup_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(weighted_speedup(&rows).unwrap(), 13.0);

        std::fs::write(&path, "weight,time_base,time_variant\n2.0,oops,10.0\n").unwrap();
        assert!(matches!(
            read_speedup_csv(&path).unwrap_err(),
            AnalyzerError::SpeedupCsv(_)
        ));
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]
            #[test]
            fn saved_fraction_monotone_in_threshold(
                seed in 0u64..10_000,
                lo_milli in 50u32..400,
                hi_delta in 1u32..400,
            ) {
                let traces = synthetic_corpus(seed, 30, 8);
                let mut policy = EarlyStopPolicy::default();
                policy.min_mapping_rate = lo_milli as f64 / 1000.0;
                let low = savings_report(&traces, &policy, "x").unwrap();
                policy.min_mapping_rate = (lo_milli + hi_delta) as f64 / 1000.0;
                let high = savings_report(&traces, &policy, "x").unwrap();
                prop_assert!(high.saved_fraction >= low.saved_fraction - 1e-12);
                prop_assert!(high.n_terminated >= low.n_terminated);
            }

            #[test]
            fn speedup_scale_invariant_in_weights(
                scale in 0.001f64..1000.0,
                rows in proptest::collection::vec(
                    (1u32..1000, 1u32..100_000, 1u32..100_000).prop_map(|(w, b, v)| SpeedupRow {
                        weight: w as f64,
                        time_base: b as f64 / 10.0,
                        time_variant: v as f64 / 10.0,
                    }),
                    1..40,
                ),
            ) {
                let base = weighted_speedup(&rows).unwrap();
                let scaled: Vec<SpeedupRow> = rows
                    .iter()
                    .map(|r| SpeedupRow { weight: r.weight * scale, ..*r })
                    .collect();
                let rescaled = weighted_speedup(&scaled).unwrap();
                prop_assert!(
                    (rescaled - base).abs() <= 1e-9 * base.abs(),
                    "{rescaled} vs {base}"
                );
            }
        }
    }
}
