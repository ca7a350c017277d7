//! Walks the filesystem queue through its whole life cycle: enqueue,
//! duplicate rejection, claim, visibility expiry, redelivery, stale
//! receipts, heartbeats, and dead-lettering.
//!
//! ```text
//! cargo run --example queue_tour
//! ```

use std::time::Duration;

use starq::queue::{FsQueue, Job, QueueError};

fn job(id: &str) -> Job {
    Job {
        job_id: id.to_string(),
        sra_id: id.to_string(),
        expected_total_reads: Some(25_000_000),
        fastq_size_bytes: Some(2_500_000_000),
        trace_ref: None,
    }
}

fn show(queue: &FsQueue, label: &str) {
    let s = queue.status().unwrap();
    println!(
        "[{label}] pending {} / inflight {} / dead {} / done {}",
        s.pending, s.inflight, s.dead, s.done
    );
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let queue = FsQueue::create(dir.path().join("q")).unwrap();
    let visibility = Duration::from_millis(200);

    for id in ["SRR5000001", "SRR5000002", "SRR5000003"] {
        let basename = queue.enqueue(&job(id)).unwrap();
        println!("enqueued {id} as {basename}");
    }
    match queue.enqueue(&job("SRR5000001")) {
        Err(QueueError::DuplicateJobId(id)) => println!("duplicate rejected: {id}"),
        other => panic!("expected a duplicate rejection, got {other:?}"),
    }
    show(&queue, "after enqueue");

    // Normal consumption: claim, work, acknowledge.
    let msg = queue.receive(visibility).unwrap().unwrap();
    println!("\nreceived {} (attempt {})", msg.job.job_id, msg.receive_count);
    queue.delete(&msg.receipt_handle).unwrap();
    println!("acknowledged {}", msg.job.job_id);
    show(&queue, "after one ack");

    // A consumer that dies mid-job: the claim simply expires and the
    // message comes back, with the old receipt no longer honored.
    let lost = queue.receive(visibility).unwrap().unwrap();
    println!("\nreceived {} and crashed without acking", lost.job.job_id);
    std::thread::sleep(visibility + Duration::from_millis(100));
    let retry = queue.receive(visibility).unwrap().unwrap();
    println!("redelivered {} (attempt {})", retry.job.job_id, retry.receive_count);
    match queue.delete(&lost.receipt_handle) {
        Err(QueueError::StaleReceipt(_)) => println!("the crashed consumer's receipt is stale"),
        other => panic!("expected a stale receipt, got {other:?}"),
    }
    // A live consumer heartbeats to keep the claim when work runs long.
    queue.extend_visibility(&retry.receipt_handle, visibility).unwrap();
    println!("heartbeat extended the claim");
    queue.delete(&retry.receipt_handle).unwrap();
    show(&queue, "after the retry");

    // A poison message fails every attempt; after max_receives the
    // reaper moves it aside instead of letting it loop forever.
    let max_receives = 2;
    for _ in 0..max_receives {
        let msg = queue.receive(visibility).unwrap().unwrap();
        println!("\nreceived {} (attempt {}), crashing again", msg.job.job_id, msg.receive_count);
        std::thread::sleep(visibility + Duration::from_millis(100));
    }
    let reaped = queue.reap(max_receives).unwrap();
    println!("reaper dead-lettered {reaped} message(s)");
    show(&queue, "final");
}
