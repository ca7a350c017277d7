//! Acceptance gate. Each test checks one shipping criterion and prints
//! a single verdict line (visible with --nocapture, or on failure).

use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use starq::analyzer::{
    self, extrapolated_full_duration, savings_from_aggregates, savings_report, weighted_speedup,
    SpeedupRow,
};
use starq::earlystop::{watch, EarlyStopPolicy, WatchOutcome};
use starq::fleetsim::{compare_scenarios, run_fleet, FleetScenario};
use starq::progress::{parse_progress_log, serialize_progress_log, ProgressRecord, ProgressTailer};
use starq::queue::{FsQueue, Job};
use starq::simalign::{synthetic_corpus, write_traces, MappingTriple, RunTrace};
use starq::store::{FsObjectStore, ObjectStore};
use starq::worker::runners::align_runner;
use starq::worker::{AlignExit, AlignSpec, JobResult, JobStatus, StageCtx};

fn verdict(number: u32, name: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("acceptance {number:02} {name}: PASS ({detail})"),
        Err(message) => {
            println!("acceptance {number:02} {name}: FAIL ({message})");
            panic!("acceptance {number:02} {name}: {message}");
        }
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starq"))
}

fn hand_trace(sra: &str, hours: f64, rate: f64) -> RunTrace {
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

fn hand_corpus() -> Vec<RunTrace> {
    vec![
        hand_trace("A", 10.0, 0.80),
        hand_trace("B", 10.0, 0.20),
        hand_trace("C", 5.0, 0.50),
    ]
}

#[test]
fn c01_aggregate_arithmetic() {
    verdict(1, "aggregate-arithmetic", (|| {
        let t0 = Instant::now();
        let output = bin()
            .args(["analyze", "--aggregate", "155.8,30.4,1000,38"])
            .output()
            .map_err(|e| format!("cannot run binary: {e}"))?;
        let elapsed = t0.elapsed().as_secs_f64();
        if !output.status.success() {
            return Err(format!("exit status {:?}", output.status.code()));
        }
        let stdout = String::from_utf8_lossy(&output.stdout).to_string();
        if !stdout.contains("19.5%") {
            return Err(format!("stdout lacks 19.5%: {stdout:?}"));
        }
        if !stdout.contains("1000 total, 38 terminated") {
            return Err(format!("stdout lacks the 38/1000 counts: {stdout:?}"));
        }
        if elapsed >= 1.0 {
            return Err(format!("took {elapsed:.3} s, budget is 1 s"));
        }
        let report = savings_from_aggregates(155.8, 30.4, 1000, 38).map_err(|e| e.to_string())?;
        let pp = report.saved_fraction * 100.0;
        if (pp - 19.5).abs() > 0.05 {
            return Err(format!("saved fraction {pp:.4} pp, want 19.5 +- 0.05"));
        }
        Ok(format!("{pp:.3} pp in {elapsed:.3} s"))
    })());
}

#[test]
fn c02_gate_rule_conformance() {
    verdict(2, "gate-rule-conformance", (|| {
        let t0 = Instant::now();
        let policy = EarlyStopPolicy::default();
        let mut traces = synthetic_corpus(11, 1500, 400);
        // Boundary rates: exactly the threshold must pass (strict cut).
        for i in 0..10 {
            let mut t = hand_trace(&format!("edge{i}"), 1.0 + i as f64, 0.30);
            t.final_mapping = MappingTriple {
                unique: 20.0,
                multi: 8.0,
                multi_plus: 2.0,
            };
            traces.push(t);
        }
        let mut violations = Vec::new();
        for (i, trace) in traces.iter().enumerate() {
            let should_stop = trace.final_mapping_rate() < policy.min_mapping_rate;
            let schedule = trace.progress_schedule(trace.duration_seconds() / 16.0);
            let aborted = std::cell::Cell::new(false);
            let outcome = watch(
                &policy,
                trace.total_reads,
                schedule.into_iter().map(|row| Ok(row.record)),
                || aborted.set(true),
            );
            match outcome {
                WatchOutcome::TerminatedLowMapRate {
                    processed_fraction, ..
                } => {
                    if processed_fraction < policy.min_processed_fraction {
                        violations.push(format!(
                            "trace {i}: terminated at fraction {processed_fraction}"
                        ));
                    }
                    if !should_stop {
                        violations.push(format!(
                            "trace {i}: terminated but rate {} is acceptable",
                            trace.final_mapping_rate()
                        ));
                    }
                    if !aborted.get() {
                        violations.push(format!("trace {i}: terminated without aborting"));
                    }
                }
                WatchOutcome::PassedGate { .. } => {
                    if should_stop {
                        violations.push(format!(
                            "trace {i}: passed with rate {}",
                            trace.final_mapping_rate()
                        ));
                    }
                }
                other => violations.push(format!("trace {i}: unexpected outcome {other:?}")),
            }
        }
        let elapsed = t0.elapsed().as_secs_f64();
        if !violations.is_empty() {
            return Err(format!(
                "{} violations, first: {}",
                violations.len(),
                violations[0]
            ));
        }
        if elapsed >= 30.0 {
            return Err(format!("took {elapsed:.1} s, budget is 30 s"));
        }
        Ok(format!("{} traces, 0 violations, {elapsed:.2} s", traces.len()))
    })());
}

#[test]
fn c03_termination_quantization_bound() {
    verdict(3, "termination-quantization", (|| {
        const TIME_SCALE: f64 = 0.001;
        const CHECKPOINT_REAL: f64 = 30.0; // 30 ms scaled
        const POLL: f64 = 0.02;
        const SLACK: f64 = 0.75;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let traces: Vec<RunTrace> = (0..200)
            .map(|i| {
                // 1500..2500 real seconds, always below the gate.
                let real_secs = rng.gen_range(1500.0..2500.0);
                let reads = 2_000_000u64;
                RunTrace {
                    sra_id: format!("LOW{i:04}"),
                    total_reads: reads,
                    read_length: 100,
                    speed_mreads_per_hr: reads as f64 / 1e6 * 3600.0 / real_secs,
                    final_mapping: MappingTriple {
                        unique: rng.gen_range(5.0..25.0),
                        multi: 0.0,
                        multi_plus: 0.0,
                    },
                    rate_profile: Vec::new(),
                    fastq_size_bytes: 0,
                }
            })
            .collect();
        let corpus_path = dir.path().join("corpus.jsonl");
        write_traces(&corpus_path, &traces).map_err(|e| e.to_string())?;

        let policy = EarlyStopPolicy {
            poll_interval_secs: POLL,
            ..EarlyStopPolicy::default()
        };
        let next = AtomicUsize::new(0);
        let violations: Mutex<Vec<String>> = Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..8 {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(trace) = traces.get(i) else { break };
                    let workdir = dir.path().join(format!("w{i}"));
                    std::fs::create_dir_all(&workdir).unwrap();
                    let job = Job {
                        job_id: trace.sra_id.clone(),
                        sra_id: trace.sra_id.clone(),
                        expected_total_reads: Some(trace.total_reads),
                        fastq_size_bytes: None,
                        trace_ref: Some(format!("{}:{}", corpus_path.display(), i + 1)),
                    };
                    let runner = align_runner(&AlignSpec::Sim {
                        time_scale: TIME_SCALE,
                        checkpoint_interval_secs: CHECKPOINT_REAL,
                    })
                    .unwrap();
                    let t0 = Instant::now();
                    let mut handle = runner
                        .start(&StageCtx {
                            job: &job,
                            workdir: &workdir,
                        })
                        .unwrap();
                    let tailer =
                        ProgressTailer::new(handle.progress_log(), policy.poll_interval());
                    let stop = tailer.stop_flag();
                    let abort = handle.aborter();
                    let total = trace.total_reads;
                    let policy = &policy;
                    let watcher =
                        scope.spawn(move || watch(policy, total, tailer, move || abort()));
                    let exit = handle.wait().unwrap();
                    let elapsed = t0.elapsed().as_secs_f64();
                    stop.store(true, Ordering::SeqCst);
                    let outcome = watcher.join().unwrap();

                    let fail = |msg: String| violations.lock().unwrap().push(msg);
                    if !matches!(exit, AlignExit::Aborted) {
                        fail(format!("run {i}: exit {exit:?}, expected a kill"));
                        continue;
                    }
                    if !matches!(outcome, WatchOutcome::TerminatedLowMapRate { .. }) {
                        fail(format!("run {i}: outcome {outcome:?}"));
                        continue;
                    }
                    let scaled = trace.duration_seconds() * TIME_SCALE;
                    let gate = policy.min_processed_fraction * scaled;
                    let lower = gate - 0.005;
                    let upper = gate + CHECKPOINT_REAL * TIME_SCALE + POLL + SLACK;
                    if elapsed < lower || elapsed > upper {
                        fail(format!(
                            "run {i}: elapsed {elapsed:.3} outside [{lower:.3}, {upper:.3}]"
                        ));
                    }
                });
            }
        });
        let violations = violations.into_inner().unwrap();
        if !violations.is_empty() {
            return Err(format!(
                "{} violations, first: {}",
                violations.len(),
                violations[0]
            ));
        }
        Ok("200 terminated runs inside the bound".to_string())
    })());
}

#[test]
fn c04_fleet_analyzer_bit_equality() {
    verdict(4, "fleet-analyzer-bit-equality", (|| {
        let policy = EarlyStopPolicy::default();
        for seed in 0..100u64 {
            let traces = synthetic_corpus(seed * 31 + 7, 50, (seed % 23) as usize);
            let report = savings_report(&traces, &policy, "synthetic")
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let with_stop = FleetScenario {
                traces: traces.clone(),
                worker_count: (seed % 7) as usize + 1,
                policy: policy.clone(),
                fixed_setup_seconds: (seed % 5) as f64 * 41.75,
                ..FleetScenario::default()
            };
            let mut without = with_stop.clone();
            without.policy.enabled = false;
            let cmp = compare_scenarios(&without, &with_stop)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            if report.saved_seconds != cmp.compute_seconds_saved {
                return Err(format!(
                    "seed {seed}: analyzer {} vs fleet {}",
                    report.saved_seconds, cmp.compute_seconds_saved
                ));
            }
            if report.total_full_seconds != cmp.base.total_job_seconds
                || report.actual_seconds != cmp.variant.total_job_seconds
            {
                return Err(format!("seed {seed}: totals disagree"));
            }
        }
        Ok("100 corpora x 50 traces, bit-equal deltas".to_string())
    })());
}

#[test]
fn c05_hand_oracle_corpus() {
    verdict(5, "hand-oracle-corpus", (|| {
        let traces = hand_corpus();
        let policy = EarlyStopPolicy::default();
        let report =
            savings_report(&traces, &policy, "hand oracle").map_err(|e| e.to_string())?;
        if report.saved_fraction != 0.36 {
            return Err(format!("analyzer fraction {}", report.saved_fraction));
        }
        let scenario = FleetScenario {
            traces,
            policy,
            ..FleetScenario::default()
        };
        let stopped = run_fleet(&scenario).map_err(|e| e.to_string())?;
        let mut unstopped = scenario.clone();
        unstopped.policy.enabled = false;
        let naive = run_fleet(&unstopped).map_err(|e| e.to_string())?;
        let fleet_fraction =
            (naive.total_job_seconds - stopped.total_job_seconds) / naive.total_job_seconds;
        if fleet_fraction != 0.36 {
            return Err(format!("fleet fraction {fleet_fraction}"));
        }
        Ok("saved fraction exactly 0.36 in analyzer and fleet".to_string())
    })());
}

#[test]
fn c06_queue_crash_safety() {
    verdict(6, "queue-crash-safety", (|| {
        const JOBS: usize = 500;
        const MAX_RECEIVES: u32 = 3;
        let visibility = Duration::from_millis(30);
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let queue = FsQueue::create(dir.path().join("q"))
            .map_err(|e| e.to_string())?
            .with_claim_grace(Duration::from_millis(40));
        let store = FsObjectStore::create(dir.path().join("s")).map_err(|e| e.to_string())?;
        for i in 0..JOBS {
            queue
                .enqueue(&Job {
                    job_id: format!("job{i:04}"),
                    sra_id: format!("SRR7{i:07}"),
                    expected_total_reads: None,
                    fastq_size_bytes: None,
                    trace_ref: None,
                })
                .map_err(|e| e.to_string())?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        let mut trials = 0u32;
        let mut crashes = 0u32;
        let mut deletes_without_result = 0u32;
        let deadline = Instant::now() + Duration::from_secs(90);
        loop {
            if Instant::now() > deadline {
                return Err("did not quiesce within 90 s".to_string());
            }
            queue.reap(MAX_RECEIVES).map_err(|e| e.to_string())?;
            match queue.receive(visibility).map_err(|e| e.to_string())? {
                Some(message) => {
                    trials += 1;
                    // Crash point: killed right after receiving.
                    if rng.gen_bool(0.30) {
                        crashes += 1;
                        continue;
                    }
                    let key = format!("results/{}/result.json", message.job.job_id);
                    store.put(&key, b"{}").map_err(|e| e.to_string())?;
                    // Crash point: result stored, killed before delete.
                    if rng.gen_bool(0.20) {
                        crashes += 1;
                        continue;
                    }
                    if store.get(&key).is_err() {
                        deletes_without_result += 1;
                    }
                    // A stale receipt here means visibility lapsed
                    // mid-work; the message redelivers, same as a crash.
                    let _ = queue.delete(&message.receipt_handle);
                }
                None => {
                    let status = queue.status().map_err(|e| e.to_string())?;
                    if status.pending == 0 && status.inflight == 0 {
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
            }
        }
        let status = queue.status().map_err(|e| e.to_string())?;
        // Dead-lettered job ids, read straight off the queue's directory
        // layout: every parked message is a flat JSON doc with a job_id.
        let mut dead_ids = std::collections::HashSet::new();
        for entry in std::fs::read_dir(dir.path().join("q").join("dead")).map_err(|e| e.to_string())? {
            let entry = entry.map_err(|e| e.to_string())?;
            let text = std::fs::read_to_string(entry.path()).map_err(|e| e.to_string())?;
            let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            if let Some(id) = doc["job_id"].as_str() {
                dead_ids.insert(id.to_string());
            }
        }
        let mut lost = 0usize;
        let mut resolved = 0usize;
        for i in 0..JOBS {
            let id = format!("job{i:04}");
            let key = format!("results/{id}/result.json");
            let has_result = store.get(&key).is_ok();
            if has_result || dead_ids.contains(&id) {
                resolved += 1;
            } else {
                lost += 1;
            }
        }
        if lost > 0 {
            return Err(format!("{lost} jobs lost"));
        }
        if deletes_without_result > 0 {
            return Err(format!("{deletes_without_result} deletes without a stored result"));
        }
        if trials < 500 {
            return Err(format!("only {trials} receive trials, want >= 500"));
        }
        Ok(format!(
            "{resolved}/{JOBS} resolved, {crashes} injected crashes over {trials} receives, {} dead-lettered",
            status.dead
        ))
    })());
}

#[test]
fn c07_parser_round_trip() {
    verdict(7, "parser-round-trip", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(707);
        for case in 0..1000 {
            let n = rng.gen_range(1..=25);
            let mut reads = 0u64;
            let mut secs = rng.gen_range(0..200_000i64);
            let base = NaiveDate::from_ymd_opt(2000, 1, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap();
            let records: Vec<ProgressRecord> = (0..n)
                .map(|_| {
                    reads += rng.gen_range(1..5_000_000u64);
                    secs += rng.gen_range(1..3600i64);
                    let unique = rng.gen_range(0..=800u32);
                    let multi = rng.gen_range(0..=(1000 - unique).min(150));
                    let plus = rng.gen_range(0..=(1000 - unique - multi).min(50));
                    ProgressRecord {
                        timestamp: base + chrono::Duration::seconds(secs),
                        speed_mreads_per_hr: rng.gen_range(1..=60_000u32) as f64 / 10.0,
                        reads_processed: reads,
                        read_length: rng.gen_range(30..=300),
                        pct_mapped_unique: unique as f64 / 10.0,
                        pct_mapped_multi: multi as f64 / 10.0,
                        pct_mapped_multi_plus: plus as f64 / 10.0,
                    }
                })
                .collect();
            let text = serialize_progress_log(&records)
                .map_err(|e| format!("case {case}: serialize: {e}"))?;
            let parsed = parse_progress_log(&text);
            if !parsed.malformed.is_empty() {
                return Err(format!("case {case}: malformed {:?}", parsed.malformed[0]));
            }
            if parsed.records != records {
                return Err(format!("case {case}: records differ after round trip"));
            }
        }
        let sample = include_str!("data/star_progress_sample.out");
        let parsed = parse_progress_log(sample);
        if !parsed.malformed.is_empty() {
            return Err(format!("sample log malformed: {:?}", parsed.malformed[0]));
        }
        if parsed.records.len() != 11 || !parsed.complete {
            return Err(format!(
                "sample log: {} records, complete={}",
                parsed.records.len(),
                parsed.complete
            ));
        }
        Ok("1000 random logs + aligner sample round-trip clean".to_string())
    })());
}

#[test]
fn c08_speedup_machinery() {
    verdict(8, "speedup-machinery", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        for case in 0..1000 {
            let n = rng.gen_range(1..=50);
            let rows: Vec<SpeedupRow> = (0..n)
                .map(|_| SpeedupRow {
                    weight: rng.gen_range(1..=1_000_000u64) as f64 / 1000.0,
                    time_base: rng.gen_range(1..=10_000_000u64) as f64 / 100.0,
                    time_variant: rng.gen_range(1..=10_000_000u64) as f64 / 100.0,
                })
                .collect();
            let fast = weighted_speedup(&rows).map_err(|e| format!("case {case}: {e}"))?;
            // Independent formulation: reversed order, ratio precomputed.
            let mut numerator = 0.0f64;
            let mut weight_sum = 0.0f64;
            for row in rows.iter().rev() {
                let ratio = row.time_base / row.time_variant;
                numerator += row.weight * ratio;
                weight_sum += row.weight;
            }
            let brute = numerator / weight_sum;
            if ((fast - brute) / brute).abs() >= 1e-12 {
                return Err(format!("case {case}: {fast} vs {brute}"));
            }
        }

        let mut base = FleetScenario {
            traces: synthetic_corpus(88, 23, 0),
            worker_count: 5,
            ..FleetScenario::default()
        };
        base.policy.enabled = false;
        let mut fast = base.clone();
        fast.speed_multiplier = 12.0;
        let cmp = compare_scenarios(&base, &fast).map_err(|e| e.to_string())?;
        if (cmp.makespan_ratio - 12.0).abs() > 0.01 {
            return Err(format!("makespan ratio {}", cmp.makespan_ratio));
        }
        Ok(format!(
            "1000 estimator cases < 1e-12; 12x multiplier ratio {:.4}",
            cmp.makespan_ratio
        ))
    })());
}

#[test]
fn c09_simulate_determinism() {
    verdict(9, "simulate-determinism", (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let corpus = dir.path().join("corpus.jsonl");
        write_traces(&corpus, &synthetic_corpus(99, 40, 9)).map_err(|e| e.to_string())?;
        // Identical argv both times; outputs are read back between runs.
        let report = dir.path().join("report.json");
        let jobs = dir.path().join("jobs.csv");
        let run = || -> Result<(Vec<u8>, Vec<u8>, Vec<u8>), String> {
            let output = bin()
                .args(["simulate", "--traces"])
                .arg(&corpus)
                .args([
                    "--workers",
                    "3",
                    "--price",
                    "2.23",
                    "--spot-discount",
                    "0.55",
                    "--speed-mult",
                    "1.5",
                    "--out",
                ])
                .arg(&report)
                .arg("--jobs-csv")
                .arg(&jobs)
                .output()
                .map_err(|e| e.to_string())?;
            if !output.status.success() {
                return Err(format!(
                    "simulate failed: {}",
                    String::from_utf8_lossy(&output.stderr)
                ));
            }
            Ok((
                std::fs::read(&report).map_err(|e| e.to_string())?,
                std::fs::read(&jobs).map_err(|e| e.to_string())?,
                output.stdout,
            ))
        };
        let first = run()?;
        let second = run()?;
        if first != second {
            return Err("repeat invocation produced different bytes".to_string());
        }
        Ok(format!("report {} bytes, byte-identical", first.0.len()))
    })());
}

#[test]
fn c10_end_to_end_desk_scale() {
    verdict(10, "end-to-end-desk-scale", (|| {
        const TIME_SCALE: f64 = 0.001;
        const POLL: f64 = 0.02;
        const CHECKPOINT_REAL: f64 = 10.0;
        let t0 = Instant::now();
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut traces = Vec::new();
        for i in 0..100u32 {
            let low = i < 15;
            // Low-rate runs are long so the gate decision dominates
            // their timing; the rest stay short to keep wall time down.
            let (reads, real_secs, rate) = if low {
                (2_500_000u64, 9000.0, 18.0 + (i % 8) as f64)
            } else {
                (2_000_000u64, 300.0, 45.0 + (i % 50) as f64)
            };
            traces.push(RunTrace {
                sra_id: format!("SRR9{i:07}"),
                total_reads: reads,
                read_length: 100,
                speed_mreads_per_hr: reads as f64 / 1e6 * 3600.0 / real_secs,
                final_mapping: MappingTriple {
                    unique: rate,
                    multi: 0.0,
                    multi_plus: 0.0,
                },
                rate_profile: Vec::new(),
                fastq_size_bytes: 1_000_000,
            });
        }
        let corpus = dir.path().join("corpus.jsonl");
        write_traces(&corpus, &traces).map_err(|e| e.to_string())?;
        let queue_dir = dir.path().join("queue");
        let store_dir = dir.path().join("store");

        let enqueue = bin()
            .arg("--queue-dir")
            .arg(&queue_dir)
            .args(["enqueue", "--traces"])
            .arg(&corpus)
            .output()
            .map_err(|e| e.to_string())?;
        if !enqueue.status.success() {
            return Err(format!(
                "enqueue failed: {}",
                String::from_utf8_lossy(&enqueue.stderr)
            ));
        }

        let mut workers = Vec::new();
        for w in 0..4 {
            let child = bin()
                .arg("--queue-dir")
                .arg(&queue_dir)
                .arg("--store-root")
                .arg(&store_dir)
                .arg("--scratch-dir")
                .arg(dir.path().join(format!("scratch{w}")))
                .args([
                    "--poll-interval",
                    &POLL.to_string(),
                    "--time-scale",
                    &TIME_SCALE.to_string(),
                    "--checkpoint-interval",
                    &CHECKPOINT_REAL.to_string(),
                    "--idle-poll",
                    "0.05",
                    "worker",
                    "--drain",
                ])
                .stdout(std::process::Stdio::null())
                .stderr(std::process::Stdio::null())
                .spawn()
                .map_err(|e| e.to_string())?;
            workers.push(child);
        }
        for mut child in workers {
            let status = child.wait().map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("worker exited with {status:?}"));
            }
        }
        let wall = t0.elapsed().as_secs_f64();
        if wall >= 120.0 {
            return Err(format!("took {wall:.1} s, budget is 120 s"));
        }

        let store = FsObjectStore::create(&store_dir).map_err(|e| e.to_string())?;
        let keys = store.list("results/").map_err(|e| e.to_string())?;
        let mut results: Vec<JobResult> = Vec::new();
        for key in keys.iter().filter(|k| k.ends_with("/result.json")) {
            let bytes = store.get(key).map_err(|e| e.to_string())?;
            results.push(serde_json::from_slice(&bytes).map_err(|e| e.to_string())?);
        }
        if results.len() != 100 {
            return Err(format!("{} result documents, want 100", results.len()));
        }
        let terminated = results
            .iter()
            .filter(|r| r.status == JobStatus::TerminatedLowMapRate)
            .count();
        if terminated != 15 {
            return Err(format!("{terminated} terminated, want 15"));
        }
        if results.iter().any(|r| r.status == JobStatus::Failed) {
            return Err("a job failed".to_string());
        }

        let policy = EarlyStopPolicy {
            poll_interval_secs: POLL,
            ..EarlyStopPolicy::default()
        };
        let analytic = savings_report(&traces, &policy, "synthetic")
            .map_err(|e| e.to_string())?
            .saved_fraction;
        // Full-duration oracle on the scaled timebase the workers ran at.
        let scaled: std::collections::HashMap<String, f64> = traces
            .iter()
            .map(|t| (t.sra_id.clone(), t.duration_seconds() * TIME_SCALE))
            .collect();
        let realized = analyzer::savings_from_results(
            &results,
            |r: &JobResult| scaled.get(&r.sra_id).copied(),
            "recorded",
        )
        .map_err(|e| e.to_string())?
        .saved_fraction;
        // Error budget: each terminated run overshoots the gate by at
        // most one checkpoint plus one poll plus scheduling slack, and
        // each completed run's measured elapsed exceeds its modeled
        // duration by sleep-granularity drift. Spread over the corpus
        // that bounds the realized-vs-analytic gap.
        let total_scaled: f64 = scaled.values().sum();
        let terminated_slack = 15.0 * (CHECKPOINT_REAL * TIME_SCALE + POLL + 0.25);
        let completed_slack = analytic * 85.0 * 0.06;
        let tolerance = (terminated_slack + completed_slack) / total_scaled + 0.005;
        if (realized - analytic).abs() > tolerance {
            return Err(format!(
                "realized {realized:.4} vs analytic {analytic:.4}, tolerance {tolerance:.4}"
            ));
        }
        let extrapolated = analyzer::savings_from_results(
            &results,
            extrapolated_full_duration,
            "recorded-extrapolated",
        )
        .map_err(|e| e.to_string())?
        .saved_fraction;
        Ok(format!(
            "100 jobs in {wall:.1} s, 15 terminated; savings realized {realized:.4} vs analytic {analytic:.4} (extrapolated {extrapolated:.4})"
        ))
    })());
}
