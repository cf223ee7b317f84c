//! Ranks the nodes of a databook corpus by degree, betweenness, closeness,
//! eigenvector and combined relevance.
//!
//!     cargo run --example centrality_ranking -- betweenness 10

use graphled::centrality::{CentralityTable, Metric};
use graphled::pipeline::run_pipeline;
use graphled::synth::{corpus_filter_config, databook_corpus};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let metric: Metric = args.next().map_or(Ok(Metric::Relevance), |s| s.parse())?;
    let top: usize = args.next().map_or(Ok(10), |s| s.parse())?;

    let ds = databook_corpus(30, 11);
    let out = run_pipeline(&ds, &corpus_filter_config(), &Default::default())?;
    let table = CentralityTable::compute(&out.graph);
    if !table.eigenvector_converged {
        eprintln!("warning: eigenvector iteration did not converge");
    }

    println!("top {top} by {metric}:");
    for row in table.ranked(metric).into_iter().take(top) {
        let node = out.graph.node(row.node_id).expect("row refers to a live node");
        let name = node
            .props
            .get("doc_id")
            .or_else(|| node.props.get("value"))
            .or_else(|| node.props.get("databook_id"))
            .map_or("?", String::as_str);
        println!("{:>10.4}  {:<9} {name}", row.value(metric), row.label.as_str());
    }
    Ok(())
}
