//! Deterministic discrete-event simulation of a worker fleet chewing
//! through a trace corpus.
//!
//! The model is intentionally small: every worker pays the same one-time
//! startup cost (fixed setup plus index load), then ready workers take
//! traces in corpus order, each occupying its worker for the trace's
//! full duration, or the early-stop fraction of it when the policy would
//! kill the run. Early stopping is analytic here (a run terminates at
//! exactly the gate fraction): that keeps the simulation deterministic
//! and lets the cost analyzer serve as its exact oracle, while the live
//! worker path covers sampling and polling quantization separately.
//!
//! Spot capacity is modeled as a price discount only; interruptions are
//! out of scope. Billing is per second, rounded up per worker.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::earlystop::EarlyStopPolicy;
use crate::simalign::RunTrace;

/// One fleet configuration over one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetScenario {
    pub traces: Vec<RunTrace>,
    pub worker_count: usize,
    pub policy: EarlyStopPolicy,
    /// Startup model: each worker is ready at
    /// `fixed_setup_seconds + index_size_bytes / load_bandwidth_bytes_per_s`.
    pub index_size_bytes: u64,
    pub load_bandwidth_bytes_per_s: f64,
    pub fixed_setup_seconds: f64,
    /// Instance price in currency units per hour.
    pub price_per_hour: f64,
    /// Multiplicative discount in [0, 1); 0.7 means paying 30%.
    pub spot_discount: f64,
    /// Uniform throughput multiplier on every trace, modeling a faster
    /// aligner or index without touching the corpus.
    pub speed_multiplier: f64,
}

impl Default for FleetScenario {
    fn default() -> Self {
        FleetScenario {
            traces: Vec::new(),
            worker_count: 1,
            policy: EarlyStopPolicy::default(),
            index_size_bytes: 0,
            load_bandwidth_bytes_per_s: 100_000_000.0,
            fixed_setup_seconds: 0.0,
            price_per_hour: 0.0,
            spot_discount: 0.0,
            speed_multiplier: 1.0,
        }
    }
}

impl FleetScenario {
    pub fn validate(&self) -> Result<(), FleetError> {
        if self.traces.is_empty() {
            return Err(FleetError::EmptyScenario);
        }
        let invalid = |reason: String| Err(FleetError::InvalidScenario(reason));
        if self.worker_count == 0 {
            return invalid("worker_count must be at least 1".to_string());
        }
        if !(self.speed_multiplier > 0.0 && self.speed_multiplier.is_finite()) {
            return invalid("speed_multiplier must be positive".to_string());
        }
        if !(self.price_per_hour >= 0.0) {
            return invalid("price_per_hour must be non-negative".to_string());
        }
        if !(0.0..1.0).contains(&self.spot_discount) {
            return invalid("spot_discount must be in [0, 1)".to_string());
        }
        if !(self.fixed_setup_seconds >= 0.0) {
            return invalid("fixed_setup_seconds must be non-negative".to_string());
        }
        if self.index_size_bytes > 0 && !(self.load_bandwidth_bytes_per_s > 0.0) {
            return invalid("load_bandwidth_bytes_per_s must be positive".to_string());
        }
        self.policy
            .validate()
            .map_err(|e| FleetError::InvalidScenario(e.to_string()))?;
        for trace in &self.traces {
            trace
                .validate()
                .map_err(|e| FleetError::InvalidScenario(e.to_string()))?;
        }
        Ok(())
    }

    /// Per-worker startup time under the scenario's parameters.
    pub fn init_overhead_seconds(&self) -> f64 {
        self.fixed_setup_seconds
            + if self.index_size_bytes > 0 {
                self.index_size_bytes as f64 / self.load_bandwidth_bytes_per_s
            } else {
                0.0
            }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FleetError {
    #[error("scenario has no traces")]
    EmptyScenario,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobOutcome {
    Completed,
    Terminated,
}

/// Dispatch record for one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub sra_id: String,
    /// Index of the worker that ran it.
    pub worker: usize,
    pub start_seconds: f64,
    pub end_seconds: f64,
    pub outcome: JobOutcome,
    /// Time the job actually occupied its worker.
    pub service_seconds: f64,
    /// What a full run would have taken at this scenario's speed.
    pub full_seconds: f64,
}

/// Everything a simulated fleet run produced. Same scenario in, byte
/// identical report out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetReport {
    /// Fleet start to last job completion.
    pub makespan_seconds: f64,
    /// Startup cost each worker paid before its first job.
    pub init_overhead_seconds: f64,
    pub worker_count: usize,
    /// Job service time per worker, startup excluded.
    pub per_worker_busy_seconds: Vec<f64>,
    /// Service time summed over jobs in corpus order.
    pub total_job_seconds: f64,
    /// Job time plus every worker's startup overhead.
    pub total_compute_seconds: f64,
    pub jobs_completed: usize,
    pub jobs_terminated: usize,
    /// Per-second billing: each worker's busy-plus-init time rounded up
    /// to whole seconds, priced hourly with the spot discount applied.
    pub total_cost: f64,
    pub jobs: Vec<JobRecord>,
}

/// Runs the scenario to completion.
pub fn run_fleet(scenario: &FleetScenario) -> Result<FleetReport, FleetError> {
    scenario.validate()?;
    let init = scenario.init_overhead_seconds();
    let workers = scenario.worker_count;
    let mut next_free = vec![init; workers];
    let mut busy = vec![0.0f64; workers];
    let mut jobs = Vec::with_capacity(scenario.traces.len());
    let mut total_job_seconds = 0.0f64;
    let mut jobs_terminated = 0usize;

    for trace in &scenario.traces {
        // Earliest-free worker, lowest index on ties: list scheduling in
        // corpus order, so no worker idles while traces remain.
        let worker = (0..workers)
            .min_by(|&a, &b| {
                next_free[a]
                    .partial_cmp(&next_free[b])
                    .expect("times are finite")
                    .then(a.cmp(&b))
            })
            .expect("at least one worker");
        let full_seconds = trace.duration_seconds() / scenario.speed_multiplier;
        let terminated = scenario.policy.enabled
            && trace.final_mapping_rate() < scenario.policy.min_mapping_rate;
        let service_seconds = if terminated {
            jobs_terminated += 1;
            scenario.policy.min_processed_fraction * full_seconds
        } else {
            full_seconds
        };
        let start_seconds = next_free[worker];
        let end_seconds = start_seconds + service_seconds;
        next_free[worker] = end_seconds;
        busy[worker] += service_seconds;
        total_job_seconds += service_seconds;
        jobs.push(JobRecord {
            sra_id: trace.sra_id.clone(),
            worker,
            start_seconds,
            end_seconds,
            outcome: if terminated {
                JobOutcome::Terminated
            } else {
                JobOutcome::Completed
            },
            service_seconds,
            full_seconds,
        });
    }

    let makespan_seconds = jobs
        .iter()
        .map(|j| j.end_seconds)
        .fold(0.0f64, f64::max);
    let unit_price = scenario.price_per_hour / 3600.0 * (1.0 - scenario.spot_discount);
    let total_cost: f64 = busy
        .iter()
        .map(|b| (b + init).ceil() * unit_price)
        .sum();
    Ok(FleetReport {
        makespan_seconds,
        init_overhead_seconds: init,
        worker_count: workers,
        total_compute_seconds: total_job_seconds + init * workers as f64,
        per_worker_busy_seconds: busy,
        total_job_seconds,
        jobs_completed: jobs.len() - jobs_terminated,
        jobs_terminated,
        total_cost,
        jobs,
    })
}

/// Side-by-side result of two scenario runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetComparison {
    pub base: FleetReport,
    pub variant: FleetReport,
    /// base makespan over variant makespan: above 1 means the variant
    /// is faster.
    pub makespan_ratio: f64,
    /// base cost over variant cost.
    pub cost_ratio: f64,
    /// Compute seconds the variant avoids relative to the base,
    /// counting both job time and startup overhead differences.
    pub compute_seconds_saved: f64,
}

/// Runs both scenarios and summarizes the deltas.
pub fn compare_scenarios(
    base: &FleetScenario,
    variant: &FleetScenario,
) -> Result<FleetComparison, FleetError> {
    let base_report = run_fleet(base)?;
    let variant_report = run_fleet(variant)?;
    let ratio = |b: f64, v: f64| if b == v { 1.0 } else { b / v };
    // Job time and init deltas are kept separate so identical startup
    // models cancel exactly instead of leaking float noise into the
    // job-time difference.
    let init_total = |r: &FleetReport| r.init_overhead_seconds * r.worker_count as f64;
    let compute_seconds_saved = (base_report.total_job_seconds
        - variant_report.total_job_seconds)
        + (init_total(&base_report) - init_total(&variant_report));
    Ok(FleetComparison {
        makespan_ratio: ratio(
            base_report.makespan_seconds,
            variant_report.makespan_seconds,
        ),
        cost_ratio: ratio(base_report.total_cost, variant_report.total_cost),
        compute_seconds_saved,
        base: base_report,
        variant: variant_report,
    })
}

/// Per-job table of a report as CSV, one row per dispatched trace in
/// corpus order.
pub fn jobs_csv(report: &FleetReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sra_id",
        "worker",
        "start_seconds",
        "end_seconds",
        "outcome",
        "service_seconds",
        "full_seconds",
    ])
    .expect("csv write to memory");
    for job in &report.jobs {
        w.write_record([
            job.sra_id.as_str(),
            &job.worker.to_string(),
            &format!("{}", job.start_seconds),
            &format!("{}", job.end_seconds),
            match job.outcome {
                JobOutcome::Completed => "completed",
                JobOutcome::Terminated => "terminated",
            },
            &format!("{}", job.service_seconds),
            &format!("{}", job.full_seconds),
        ])
        .expect("csv write to memory");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv is utf-8")
}
