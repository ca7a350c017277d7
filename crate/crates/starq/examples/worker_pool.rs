//! Runs a small in-process worker pool end to end: builds a trace
//! corpus, enqueues one job per trace, processes everything with three
//! worker threads using the simulated aligner, then reports what the
//! early stopping saved. Takes a few seconds of wall time.
//!
//! ```text
//! cargo run --example worker_pool
//! ```

use starq::analyzer::savings_from_results;
use starq::earlystop::EarlyStopPolicy;
use starq::queue::{FsQueue, Job};
use starq::simalign::{write_traces, MappingTriple, RunTrace};
use starq::store::{FsObjectStore, ObjectStore};
use starq::worker::{
    worker_init, AlignSpec, JobResult, LoopOptions, LoopSummary, RunnerSpecs, ShutdownSignal,
    WorkerConfig,
};

// 1000x faster than real time: a 900 s alignment takes 0.9 s here.
const TIME_SCALE: f64 = 0.001;

fn trace(i: usize, reads_m: u64, unique_pct: f64) -> RunTrace {
    RunTrace {
        sra_id: format!("SRR42{:06}", i),
        total_reads: reads_m * 1_000_000,
        read_length: 100,
        speed_mreads_per_hr: 100.0,
        final_mapping: MappingTriple {
            unique: unique_pct,
            multi: 2.0,
            multi_plus: 0.5,
        },
        rate_profile: Vec::new(),
        fastq_size_bytes: reads_m * 100_000_000,
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.jsonl");

    // Eight healthy runs and four that map so poorly the watchdog will
    // cut them off at the judgement gate.
    let mut traces = Vec::new();
    for i in 0..12 {
        let unique = if i % 3 == 2 { 4.0 + i as f64 } else { 65.0 + 2.0 * i as f64 };
        traces.push(trace(i, 20 + (i as u64 % 4) * 5, unique));
    }
    write_traces(&corpus_path, &traces).unwrap();

    let queue = FsQueue::create(dir.path().join("q")).unwrap();
    let corpus_abs = std::fs::canonicalize(&corpus_path).unwrap();
    for (i, t) in traces.iter().enumerate() {
        queue
            .enqueue(&Job {
                job_id: t.sra_id.clone(),
                sra_id: t.sra_id.clone(),
                expected_total_reads: Some(t.total_reads),
                fastq_size_bytes: Some(t.fastq_size_bytes),
                trace_ref: Some(format!("{}:{}", corpus_abs.display(), i + 1)),
            })
            .unwrap();
    }
    println!("enqueued {} jobs", traces.len());

    let config = WorkerConfig {
        queue_dir: dir.path().join("q"),
        store_root: dir.path().join("store"),
        scratch_dir: dir.path().join("scratch"),
        // The log must be polled on the compressed timebase too, or the
        // judgement would lose the race against these 1 s runs.
        policy: EarlyStopPolicy {
            poll_interval_secs: 0.02,
            ..EarlyStopPolicy::default()
        },
        visibility_timeout_secs: 30.0,
        idle_poll_secs: 0.05,
        runners: RunnerSpecs {
            align: AlignSpec::Sim {
                time_scale: TIME_SCALE,
                checkpoint_interval_secs: 30.0,
            },
            ..RunnerSpecs::default()
        },
        ..WorkerConfig::default()
    };

    let shutdown = ShutdownSignal::new();
    let options = LoopOptions {
        max_jobs: None,
        drain: true,
    };
    let mut totals = LoopSummary::default();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..3)
            .map(|i| {
                let config = config.clone();
                let shutdown = &shutdown;
                scope.spawn(move || {
                    let worker = worker_init(config).expect("worker init");
                    let summary = worker.run_loop(shutdown, options);
                    println!(
                        "worker {i}: {} completed, {} terminated, {} failed",
                        summary.completed, summary.terminated, summary.failed
                    );
                    summary
                })
            })
            .collect();
        for handle in handles {
            let s = handle.join().unwrap();
            totals.completed += s.completed;
            totals.terminated += s.terminated;
            totals.failed += s.failed;
        }
    });
    println!(
        "pool done: {} completed, {} terminated, {} failed\n",
        totals.completed, totals.terminated, totals.failed
    );

    let store = FsObjectStore::create(dir.path().join("store")).unwrap();
    let mut results: Vec<JobResult> = Vec::new();
    for key in store.list("results/").unwrap() {
        if key.ends_with("/result.json") {
            results.push(serde_json::from_slice(&store.get(&key).unwrap()).unwrap());
        }
    }
    results.sort_by(|a, b| a.sra_id.cmp(&b.sra_id));
    for r in &results {
        println!(
            "{} {:<22} align {:>6.2} s  rate {:>5.1}%  processed {:>5.1}%",
            r.sra_id,
            format!("{:?}", r.status),
            r.align_elapsed,
            r.observed_mapping_rate * 100.0,
            r.processed_fraction_at_stop * 100.0
        );
    }

    // The workers ran on a 1000x compressed clock; stretch measured
    // elapsed times back out so the report reads in real units, with
    // full durations for the cut runs taken from the traces.
    let real_timebase: Vec<JobResult> = results
        .iter()
        .map(|r| JobResult {
            align_elapsed: r.align_elapsed / TIME_SCALE,
            ..r.clone()
        })
        .collect();
    let full_by_sra: std::collections::HashMap<String, f64> = traces
        .iter()
        .map(|t| (t.sra_id.clone(), t.duration_seconds()))
        .collect();
    let report = savings_from_results(
        &real_timebase,
        |r| full_by_sra.get(&r.sra_id).copied(),
        "worker_pool demo",
    )
    .unwrap();
    println!("\n{report}");
}
