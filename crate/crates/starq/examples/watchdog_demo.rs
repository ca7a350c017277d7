//! Judges two simulated alignments with the early-stop rule, without
//! spending any wall time: the progress rows a run would emit are fed
//! straight into the watcher.
//!
//! ```text
//! cargo run --example watchdog_demo
//! ```

use starq::earlystop::{watch, EarlyStopPolicy, WatchOutcome};
use starq::simalign::{MappingTriple, RunTrace};

fn trace(sra_id: &str, unique_pct: f64) -> RunTrace {
    RunTrace {
        sra_id: sra_id.to_string(),
        total_reads: 40_000_000,
        read_length: 100,
        speed_mreads_per_hr: 250.0,
        final_mapping: MappingTriple {
            unique: unique_pct,
            multi: 3.0,
            multi_plus: 0.5,
        },
        rate_profile: Vec::new(),
        fastq_size_bytes: 4_000_000_000,
    }
}

fn judge(policy: &EarlyStopPolicy, t: &RunTrace) {
    let full = t.duration_seconds();
    println!(
        "{}: {:.1} Mreads at {:.0} Mreads/hr, full run {:.0} s ({:.1} h)",
        t.sra_id,
        t.total_reads as f64 / 1e6,
        t.speed_mreads_per_hr,
        full,
        full / 3600.0
    );

    // One row per simulated minute, exactly what the sim runner writes.
    let rows = t.progress_schedule(60.0);
    let outcome = watch(
        policy,
        t.total_reads,
        rows.into_iter().map(|row| Ok(row.record)),
        || println!("  -> abort callback fired, aligner would be killed here"),
    );
    match outcome {
        WatchOutcome::PassedGate {
            observed_mapping_rate,
            processed_fraction,
        } => println!(
            "  passed the gate at {:.1}% processed with a {:.1}% mapping rate; runs to completion",
            processed_fraction * 100.0,
            observed_mapping_rate * 100.0
        ),
        WatchOutcome::TerminatedLowMapRate {
            observed_mapping_rate,
            processed_fraction,
        } => println!(
            "  terminated at {:.1}% processed with a {:.1}% mapping rate; saves {:.0} s of compute",
            processed_fraction * 100.0,
            observed_mapping_rate * 100.0,
            (1.0 - processed_fraction) * full
        ),
        WatchOutcome::CompletedUnjudged => println!("  stream ended before the gate"),
        WatchOutcome::WatchFailed(e) => println!("  watch failed: {e}"),
    }
    println!();
}

fn main() {
    let policy = EarlyStopPolicy::default();
    println!(
        "policy: judge at {:.0}% processed, terminate below a {:.0}% mapping rate\n",
        policy.min_processed_fraction * 100.0,
        policy.min_mapping_rate * 100.0
    );

    judge(&policy, &trace("SRR30000001", 88.0));
    judge(&policy, &trace("SRR30000002", 9.0));
}
