//! Summarizes paired runtimes from two setups into one speedup figure,
//! weighting each sample by its input size so big runs count for more.
//!
//! ```text
//! cargo run --example speedup
//! ```

use starq::analyzer::{weighted_speedup, SpeedupEstimator, SpeedupRow};

fn main() {
    // weight = FASTQ gigabytes; times in minutes on the old and new setup.
    let samples = [
        ("SRR7000001", 12.4, 95.0, 7.6),
        ("SRR7000002", 3.1, 31.0, 2.4),
        ("SRR7000003", 28.0, 210.0, 17.0),
        ("SRR7000004", 6.8, 55.0, 4.7),
        ("SRR7000005", 1.2, 14.0, 1.3),
    ];
    let rows: Vec<SpeedupRow> = samples
        .iter()
        .map(|&(_, weight, base, variant)| SpeedupRow {
            weight,
            time_base: base,
            time_variant: variant,
        })
        .collect();

    for (&(id, weight, base, variant), row) in samples.iter().zip(&rows) {
        println!(
            "{id}  {weight:>5.1} GB  {base:>6.1} min -> {variant:>5.1} min  ({:.1}x)",
            row.time_base / row.time_variant
        );
    }

    // Size-weighted mean of per-sample ratios: the big samples dominate.
    let speedup = weighted_speedup(&rows).unwrap();
    println!("\nweighted speedup: {speedup:.1}x");

    // The ratio-of-sums estimator answers a different question: how
    // much sooner does the whole weighted batch finish?
    let totals = SpeedupEstimator::RatioOfSums.estimate(&rows).unwrap();
    println!("ratio-of-sums speedup: {totals:.1}x");
}
