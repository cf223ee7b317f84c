//! Collapses noisy supplier spellings into canonical names and reports how
//! much ambiguity was removed.
//!
//!     cargo run --example disambiguate_suppliers -- 7

use graphled::disambiguation::{ambiguity_metrics, FilterConfig};
use graphled::ingest::TopicKeys;
use graphled::pipeline::disambiguate_set;
use graphled::synth::supplier_replica;

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let replica = supplier_replica(seed);
    let (report, mentions) = disambiguate_set(&replica.documents, &FilterConfig::default(), &TopicKeys::default())?;

    for cluster in report.clusters.iter().take(5) {
        println!("{:<20} <- {}", cluster.canonical, cluster.members.join(" | "));
    }
    println!("...");

    let m = ambiguity_metrics(&report, replica.distinct_raw(), Some(replica.entity_count()))?;
    println!(
        "{mentions} mentions, {} spellings, {} canonical names for {} suppliers",
        report.distinct_raw(),
        report.distinct_canonical(),
        replica.entity_count()
    );
    if let Some(removal) = m.removal_pct {
        println!("ambiguity removed: {:.2}%", removal * 100.0);
    }
    println!("node reduction: {:.2}%", m.reduction_pct * 100.0);
    Ok(())
}
