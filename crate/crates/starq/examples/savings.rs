//! Estimates what early stopping saves on a corpus before running
//! anything, and shows the same report built from already-aggregated
//! figures.
//!
//! ```text
//! cargo run --example savings
//! ```

use starq::analyzer::{percent_display, savings_from_aggregates, savings_report};
use starq::earlystop::EarlyStopPolicy;
use starq::simalign::synthetic_corpus;

fn main() {
    let policy = EarlyStopPolicy::default();

    // Planning ahead: given per-run durations and final mapping rates,
    // what would the watchdog have cut?
    let traces = synthetic_corpus(7, 1200, 240);
    let report = savings_report(&traces, &policy, "synthetic corpus").unwrap();
    println!("{report}");
    println!(
        "headline: {} of total compute avoided\n",
        percent_display(report.saved_fraction)
    );

    // After the fact: feed in figures from a campaign that already ran.
    // 2000 machine hours of full-run cost, 310 saved, 52 of 500 runs cut.
    let report = savings_from_aggregates(2000.0, 310.0, 500, 52).unwrap();
    println!("{report}");
}
