//! Runs the reference write/read mix against a scratch graph and prints
//! the per-pattern latency table.
//!
//!     cargo run --release --example workload_benchmark -- 1000 10

use std::time::Instant;

use graphled::workload::{run_benchmark, WorkloadSpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(200), |s| s.parse())?;
    let concurrency: usize = args.next().map_or(Ok(10), |s| s.parse())?;

    let spec = WorkloadSpec::reference(n, concurrency, 7);
    let started = Instant::now();
    let (report, graph) = run_benchmark(&spec)?;

    print!("{}", report.to_csv());
    println!(
        "\n{} operations, {} nodes, {} edges in {:.1}s; audit clean: {}",
        report.total_runs,
        report.node_count,
        report.edge_count,
        started.elapsed().as_secs_f64(),
        graph.audit().is_clean()
    );
    Ok(())
}
