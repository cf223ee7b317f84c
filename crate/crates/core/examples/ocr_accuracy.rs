//! Grades OCR output against ground truth as total hit, partial hit or
//! inconsistency, for an easy and a difficult document profile.
//!
//!     cargo run --example ocr_accuracy -- 5000

use graphled::inspection::{classify_ocr_accuracy, corpus_accuracy_summary};
use graphled::synth::{ocr_corpus, OcrProfile};

fn main() -> anyhow::Result<()> {
    let fields: usize = std::env::args().nth(1).map_or(Ok(5000), |s| s.parse())?;
    for (name, profile) in [("easy", OcrProfile::EASY), ("difficult", OcrProfile::DIFFICULT)] {
        let pairs = ocr_corpus(profile, fields, 1);
        for p in pairs.iter().take(3) {
            let label = classify_ocr_accuracy(&p.ocr, &p.truth)?;
            println!("  {:<22} vs {:<22} {:?} ({:.2})", p.ocr, p.truth, label.class, label.similarity);
        }
        let labels = pairs
            .iter()
            .map(|p| classify_ocr_accuracy(&p.ocr, &p.truth))
            .collect::<Result<Vec<_>, _>>()?;
        let s = corpus_accuracy_summary(&labels)?;
        println!(
            "{name}: {:.2}% total hit, {:.2}% partial hit, {:.2}% inconsistency over {} fields\n",
            s.total_hit_pct, s.partial_pct, s.inconsistency_pct, s.fields
        );
    }
    Ok(())
}
