//! Supervises a live aligner in real time: starts the simulated aligner
//! on a hopeless run, tails its progress log as it grows, and kills it
//! at the judgement gate. Finishes in well under a second because the
//! simulation runs 1000x faster than real time.
//!
//! ```text
//! cargo run --example live_watch
//! ```

use std::time::Instant;

use starq::earlystop::{watch, EarlyStopPolicy, WatchOutcome};
use starq::progress::ProgressTailer;
use starq::queue::Job;
use starq::simalign::{write_traces, MappingTriple, RunTrace};
use starq::worker::runners::align_runner;
use starq::worker::{AlignSpec, StageCtx};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    // A 20 minute run mapping at 8.5%: doomed, but only obvious once
    // a tenth of it has been processed.
    let trace = RunTrace {
        sra_id: "SRR60000001".to_string(),
        total_reads: 30_000_000,
        read_length: 100,
        speed_mreads_per_hr: 90.0,
        final_mapping: MappingTriple {
            unique: 8.0,
            multi: 0.5,
            multi_plus: 0.0,
        },
        rate_profile: Vec::new(),
        fastq_size_bytes: 3_000_000_000,
    };
    let full_seconds = trace.duration_seconds();
    let corpus = dir.path().join("corpus.jsonl");
    write_traces(&corpus, &[trace.clone()]).unwrap();

    let job = Job {
        job_id: trace.sra_id.clone(),
        sra_id: trace.sra_id.clone(),
        expected_total_reads: Some(trace.total_reads),
        fastq_size_bytes: Some(trace.fastq_size_bytes),
        trace_ref: Some(format!("{}:1", corpus.display())),
    };

    let time_scale = 0.001;
    let runner = align_runner(&AlignSpec::Sim {
        time_scale,
        checkpoint_interval_secs: 30.0,
    })
    .unwrap();
    let policy = EarlyStopPolicy {
        poll_interval_secs: 0.02,
        ..EarlyStopPolicy::default()
    };

    let workdir = dir.path().join("work");
    std::fs::create_dir_all(&workdir).unwrap();
    let started = Instant::now();
    let mut handle = runner
        .start(&StageCtx {
            job: &job,
            workdir: &workdir,
        })
        .unwrap();
    println!(
        "aligner started; full run would take {:.0} s of simulated time ({:.1} s of wall time)",
        full_seconds,
        full_seconds * time_scale
    );

    let tailer = ProgressTailer::new(handle.progress_log(), policy.poll_interval());
    let abort = handle.aborter();
    let (outcome, exit) = std::thread::scope(|scope| {
        let watcher = scope.spawn(|| watch(&policy, trace.total_reads, tailer, move || abort()));
        let exit = handle.wait().expect("aligner wait");
        (watcher.join().unwrap(), exit)
    });
    let elapsed = started.elapsed().as_secs_f64();

    match outcome {
        WatchOutcome::TerminatedLowMapRate {
            observed_mapping_rate,
            processed_fraction,
        } => println!(
            "terminated at {:.1}% processed, mapping rate {:.1}%",
            processed_fraction * 100.0,
            observed_mapping_rate * 100.0
        ),
        other => println!("unexpected outcome: {other:?}"),
    }
    println!("aligner exit: {exit:?} after {elapsed:.2} s of wall time");
}
