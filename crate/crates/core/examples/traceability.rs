//! Follows shared batch numbers and laboratories outward from one document
//! and reports dangling references and incomplete databooks on the way.
//!
//!     cargo run --example traceability -- MC-5005 4

use graphled::graph::Label;
use graphled::inspection::{trace, DEFAULT_TRACE_DEPTH};
use graphled::pipeline::run_pipeline;
use graphled::synth::{complete_star, incomplete_databook};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = args.next().unwrap_or_else(|| "MC-5005".into());
    let depth: usize = args.next().map_or(Ok(DEFAULT_TRACE_DEPTH), |s| s.parse())?;

    let ds = complete_star().merge(incomplete_databook())?;
    let out = run_pipeline(&ds, &Default::default(), &Default::default())?;
    let report = trace(&out.graph, &root, depth)?;

    for step in &report.visited {
        let indent = "  ".repeat(step.depth);
        let marker = if step.label == Label::Document { "doc" } else { "via" };
        println!("{indent}{marker} {}", step.name);
    }
    for b in &report.broken_links {
        println!("dangling: {} {}={} ({})", b.doc_id, b.key, b.value, b.reason);
    }
    for d in &report.incomplete_databooks {
        println!("incomplete databook reached: {d}");
    }
    println!("complete trace: {}", report.complete_trace);
    Ok(())
}
