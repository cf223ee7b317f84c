//! Saves a graph to the line-oriented file format and loads it back.
//!
//!     cargo run --example persistence -- corpus.graph

use graphled::graph;
use graphled::pipeline::run_pipeline;
use graphled::synth::{corpus_filter_config, databook_corpus};

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir().join("graphled-example.graph").display().to_string()
    });
    let out = run_pipeline(&databook_corpus(50, 9), &corpus_filter_config(), &Default::default())?;
    let bytes = graph::save(&out.graph, path.as_ref())?;
    println!("wrote {bytes} bytes to {path}");

    let loaded = graph::load(path.as_ref())?;
    println!(
        "loaded {} nodes and {} edges; identical: {}; audit clean: {}",
        loaded.node_count(),
        loaded.edge_count(),
        loaded.logically_eq(&out.graph),
        loaded.audit().is_clean()
    );
    Ok(())
}
