//! Loads OCR output (or a generated corpus), builds the property graph and
//! runs a traversal over it.
//!
//!     cargo run --example ingest_and_build -- path/to/loader.json

use graphled::graph::{traverse, Label, PropFilter, PropTarget, TraversalQuery};
use graphled::ingest::{read_loader_file, TopicKeys};
use graphled::pipeline::run_pipeline;
use graphled::synth::{corpus_filter_config, databook_corpus};

fn main() -> anyhow::Result<()> {
    let ds = match std::env::args().nth(1) {
        Some(path) => read_loader_file(path.as_ref())?,
        None => databook_corpus(20, 3),
    };
    let out = run_pipeline(&ds, &corpus_filter_config(), &TopicKeys::default())?;
    println!("{:#?}", out.counts);
    println!("{} nodes, {} edges", out.graph.node_count(), out.graph.edge_count());
    for (label, count) in out.graph.label_histogram() {
        println!("  {:<10} {count}", label.as_str());
    }

    // every document pointing at the first databook's batch number
    let Some(doc) = ds.databooks().first().and_then(|b| ds.document(&b.document_ids[0])) else {
        return Ok(());
    };
    let Some(block) = doc.blocks.iter().find(|b| b.link_hint) else {
        return Ok(());
    };
    let batch = out.report.canonical(&block.key, &block.value).unwrap_or(&block.value);
    let query = TraversalQuery {
        src_label: Some(Label::Document),
        rel_type: Some(block.key.clone()),
        dst_label: Some(Label::Topic),
        prop_filters: vec![PropFilter {
            key: "value".into(),
            value: batch.to_string(),
            on: PropTarget::Dst,
        }],
        ..TraversalQuery::default()
    };
    println!("\ndocuments with {}={batch}:", block.key);
    for t in traverse(&out.graph, &query)? {
        println!("  {} (raw `{}`)", t.src.props["doc_id"], t.edge.props["raw_value"]);
    }
    Ok(())
}
