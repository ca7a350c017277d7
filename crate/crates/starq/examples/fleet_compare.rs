//! Simulates the same workload on two fleets, identical except that one
//! terminates hopeless runs at the judgement gate, and compares
//! makespan, compute, and cost. Pure arithmetic, no wall time.
//!
//! ```text
//! cargo run --example fleet_compare
//! ```

use starq::earlystop::EarlyStopPolicy;
use starq::fleetsim::{compare_scenarios, FleetReport, FleetScenario};
use starq::simalign::synthetic_corpus;

fn describe(label: &str, r: &FleetReport) {
    println!(
        "{label:<12} makespan {:>8.1} h   compute {:>8.1} h   cost ${:>8.2}   {} done / {} cut",
        r.makespan_seconds / 3600.0,
        r.total_compute_seconds / 3600.0,
        r.total_cost,
        r.jobs_completed,
        r.jobs_terminated
    );
}

fn main() {
    // 400 runs, a quarter of them with mapping rates below the cut.
    let traces = synthetic_corpus(42, 400, 100);

    let baseline = FleetScenario {
        traces: traces.clone(),
        worker_count: 8,
        policy: EarlyStopPolicy {
            enabled: false,
            ..EarlyStopPolicy::default()
        },
        // Each worker pays for the aligner index once at startup:
        // 30 GB over a gigabit link plus a fixed provisioning charge.
        index_size_bytes: 30_000_000_000,
        load_bandwidth_bytes_per_s: 125_000_000.0,
        fixed_setup_seconds: 90.0,
        price_per_hour: 0.77,
        spot_discount: 0.70,
        speed_multiplier: 1.0,
    };
    let early_stop = FleetScenario {
        policy: EarlyStopPolicy::default(),
        ..baseline.clone()
    };

    let cmp = compare_scenarios(&baseline, &early_stop).unwrap();
    describe("baseline", &cmp.base);
    describe("early stop", &cmp.variant);
    println!(
        "\nearly stopping: {:.2}x faster makespan, {:.2}x cheaper, {:.1} h of compute avoided",
        cmp.makespan_ratio,
        cmp.cost_ratio,
        cmp.compute_seconds_saved / 3600.0
    );

    // Hardware comparisons use the same machinery: leaving the policy
    // alone and scaling per-worker throughput models a faster node type.
    let faster_nodes = FleetScenario {
        speed_multiplier: 3.0,
        price_per_hour: 2.31,
        ..early_stop.clone()
    };
    let cmp = compare_scenarios(&early_stop, &faster_nodes).unwrap();
    println!(
        "3x nodes at 3x price: {:.2}x faster makespan, cost ratio {:.2}",
        cmp.makespan_ratio, cmp.cost_ratio
    );
}
