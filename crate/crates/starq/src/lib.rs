//! Queue-driven orchestration for STAR RNA-seq alignment fleets.
//!
//! `starq` reproduces, at desk scale, the moving parts of a cloud alignment
//! pipeline: an at-least-once work queue backed by the local filesystem, a
//! worker that runs the four pipeline stages (fetch, convert, align,
//! normalize) with a pluggable aligner, an early-stop watchdog that tails
//! STAR's `Log.progress.out` and aborts hopeless alignments, plus a
//! deterministic fleet simulator and offline analyzers for savings, cost,
//! and speedup accounting.
//!
//! The crate is a library first. Each major capability has a runnable
//! example under `examples/`:
//!
//! ```text
//! cargo run --example parse_progress     # progress-log parsing
//! cargo run --example watchdog_demo      # early-stop rule on precomputed progress rows
//! cargo run --example live_watch         # tailing and aborting a live simulated aligner
//! cargo run --example queue_tour         # queue semantics walkthrough
//! cargo run --example worker_pool        # end-to-end worker pool over simulated jobs
//! cargo run --example fleet_compare      # fleet simulation and scenario comparison
//! cargo run --example savings            # savings reports over a trace corpus
//! cargo run --example speedup            # weighted speedup computation
//! ```
//!
//! A thin `starq` binary exposes the same operations as subcommands for
//! batch environments (`enqueue`, `worker`, `watchdog`, `simulate`,
//! `analyze`, `speedup`, `queue-status`, `simulate-align`).

pub mod analyzer;
pub mod cli;
pub mod earlystop;
pub mod fleetsim;
pub mod simalign;
pub mod progress;
pub mod queue;
pub mod store;
pub mod worker;
