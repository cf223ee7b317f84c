//! Checks extracted field values against declarative rules taken from a
//! material standard.
//!
//!     cargo run --example conformance_rules

use graphled::inspection::{all_conformant, check_conformance, parse_rules, Outcome};
use graphled::synth::complete_star;

const RULES: &str = r#"[
  {"rule_id": "yield-min", "doc_type": "material-certificate", "field_key": "YIELD_MPA",
   "check": {"kind": "numeric_range", "min": 245, "max": 450, "units": "MPa"},
   "standard_ref": "API 5L PSL2 X52"},
  {"rule_id": "grade", "doc_type": "material-certificate", "field_key": "GRADE",
   "check": {"kind": "value_in_set", "values": ["X52", "X60", "X65"]}},
  {"rule_id": "hardness", "doc_type": "test-report", "field_key": "HARDNESS_HB",
   "check": {"kind": "numeric_range", "min": 120, "max": 180}},
  {"rule_id": "batch", "doc_type": "purchase-order", "field_key": "OS_LOTE",
   "check": {"kind": "regex_match", "pattern": "L-[0-9]{4}"}}
]"#;

fn main() -> anyhow::Result<()> {
    let rules = parse_rules(RULES)?;
    let results = check_conformance(&complete_star(), &rules)?;
    for r in results.iter().filter(|r| r.outcome != Outcome::Inapplicable) {
        println!("{:<8} {:<10} {:?} {}", r.doc_id, r.rule_id, r.outcome, r.detail);
    }
    println!("conformant: {}", all_conformant(&results));
    Ok(())
}
