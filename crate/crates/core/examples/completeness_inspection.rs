//! Checks databooks for missing document types and for documents cut off
//! from the rest of the databook.
//!
//!     cargo run --example completeness_inspection

use graphled::inspection::check_databook;
use graphled::pipeline::run_pipeline;
use graphled::synth::{complete_star, incomplete_databook};

fn main() -> anyhow::Result<()> {
    let ds = complete_star().merge(incomplete_databook())?;
    let out = run_pipeline(&ds, &Default::default(), &Default::default())?;
    for book in ds.databooks() {
        let r = check_databook(&out.graph, &book.databook_id)?;
        let verdict = if r.is_complete { "complete" } else { "INCOMPLETE" };
        println!("{} {verdict}", r.databook_id);
        for t in &r.missing_doc_types {
            println!("  missing a {}", t.as_str());
        }
        for d in &r.isolated_documents {
            println!("  {d} is not linked to the rest of the databook");
        }
        if r.components.len() > 1 {
            println!("  {} disconnected groups: {:?}", r.components.len(), r.components);
        }
    }
    Ok(())
}
