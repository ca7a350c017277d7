//! Parses a STAR `Log.progress.out` file and prints what it found.
//!
//! Run with a path to your own log, or with no arguments to use the
//! bundled sample:
//!
//! ```text
//! cargo run --example parse_progress [-- /path/to/Log.progress.out]
//! ```

use starq::progress::parse_progress_log;

const SAMPLE: &str = include_str!("../tests/data/star_progress_sample.out");

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("cannot read {path}: {e}")),
        None => SAMPLE.to_string(),
    };

    let parsed = parse_progress_log(&text);
    println!(
        "{} records, {} malformed lines, complete: {}",
        parsed.records.len(),
        parsed.malformed.len(),
        parsed.complete
    );
    for warning in &parsed.warnings {
        println!("warning: {warning:?}");
    }

    println!();
    println!("{:<22} {:>12} {:>10} {:>8} {:>8} {:>8}", "time", "reads", "Mrd/hr", "uniq%", "multi%", "multi+%");
    for r in &parsed.records {
        println!(
            "{:<22} {:>12} {:>10.1} {:>8.1} {:>8.1} {:>8.1}",
            r.timestamp.format("%b %d %H:%M:%S"),
            r.reads_processed,
            r.speed_mreads_per_hr,
            r.pct_mapped_unique,
            r.pct_mapped_multi,
            r.pct_mapped_multi_plus,
        );
    }

    if let Some(last) = parsed.records.last() {
        let mapped = last.pct_mapped_unique + last.pct_mapped_multi + last.pct_mapped_multi_plus;
        println!();
        println!("final combined mapping rate: {mapped:.1}%");
    }
}
