//! Completeness, conformance and traceability checks, plus OCR accuracy
//! grading against ground truth.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::disambiguation::{normalize_tokens, sequence_matcher_ratio, FilterConfig, UnionFind};
use crate::graph::{EdgeId, Label, NodeId, PropertyGraph, CONTAINS};
use crate::ingest::{DocType, DocumentSet};

pub const DEFAULT_TRACE_DEPTH: usize = 16;
pub const DEFAULT_PARTIAL_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum InspectionError {
    #[error("unknown databook `{0}`")]
    UnknownDatabook(String),
    #[error("unknown document `{0}`")]
    UnknownNode(String),
    #[error("max_depth must be at least 1")]
    ZeroDepth,
    #[error("rule `{rule_id}`: {message}")]
    InvalidRule { rule_id: String, message: String },
    #[error("rules file: {0}")]
    RulesFormat(String),
    #[error("ground-truth value is empty")]
    EmptyTruth,
    #[error("no classified fields")]
    EmptyCorpus,
}

// ---------------------------------------------------------------------------
// completeness

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub databook_id: String,
    pub is_complete: bool,
    pub missing_doc_types: Vec<DocType>,
    /// Members cut off from the main connected group.
    pub isolated_documents: Vec<String>,
    pub connected: bool,
    /// Member documents grouped by topic connectivity, largest group first.
    pub components: Vec<Vec<String>>,
}

fn databook_node(g: &PropertyGraph, databook_id: &str) -> Result<NodeId, InspectionError> {
    g.find_nodes(Label::Databook, "databook_id", databook_id)
        .first()
        .copied()
        .ok_or_else(|| InspectionError::UnknownDatabook(databook_id.to_string()))
}

fn document_node(g: &PropertyGraph, doc_id: &str) -> Result<NodeId, InspectionError> {
    g.find_nodes(Label::Document, "doc_id", doc_id)
        .first()
        .copied()
        .ok_or_else(|| InspectionError::UnknownNode(doc_id.to_string()))
}

fn prop<'a>(g: &'a PropertyGraph, id: NodeId, key: &str) -> &'a str {
    g.node(id).and_then(|n| n.props.get(key)).map_or("", String::as_str)
}

fn members(g: &PropertyGraph, book: NodeId) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = g
        .out_edges(book)
        .iter()
        .filter_map(|e| g.edge(*e))
        .filter(|e| e.rel_type == CONTAINS)
        .map(|e| e.dst)
        .filter(|d| g.node(*d).is_some_and(|n| n.label == Label::Document))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn topics_of(g: &PropertyGraph, doc: NodeId) -> BTreeSet<NodeId> {
    g.out_edges(doc)
        .iter()
        .filter_map(|e| g.edge(*e))
        .map(|e| e.dst)
        .filter(|t| g.node(*t).is_some_and(|n| n.label == Label::Topic))
        .collect()
}

/// Required types as stored on the databook node at build time.
pub fn stored_required_types(g: &PropertyGraph, databook_id: &str) -> Result<Vec<DocType>, InspectionError> {
    let book = databook_node(g, databook_id)?;
    Ok(prop(g, book, "required_doc_types")
        .split(',')
        .filter(|s| !s.is_empty())
        .map(DocType::parse_lenient)
        .collect())
}

/// Completeness against the databook's own required-type list.
pub fn check_databook(g: &PropertyGraph, databook_id: &str) -> Result<CompletenessReport, InspectionError> {
    let required = stored_required_types(g, databook_id)?;
    check_completeness(g, databook_id, &required)
}

/// Documents are connected when they share a topic node. Members outside
/// the largest connected group (ties go to the group whose sorted doc ids
/// come first) are reported as isolated.
pub fn check_completeness(
    g: &PropertyGraph,
    databook_id: &str,
    required: &[DocType],
) -> Result<CompletenessReport, InspectionError> {
    let book = databook_node(g, databook_id)?;
    let docs = members(g, book);

    let present: BTreeSet<DocType> = docs
        .iter()
        .map(|d| DocType::parse_lenient(prop(g, *d, "doc_type")))
        .collect();
    let mut missing: Vec<DocType> = Vec::new();
    for t in required {
        if !present.contains(t) && !missing.contains(t) {
            missing.push(*t);
        }
    }

    let mut uf = UnionFind::new(docs.len());
    let mut first_holder: HashMap<NodeId, usize> = HashMap::new();
    for (i, d) in docs.iter().enumerate() {
        for t in topics_of(g, *d) {
            if let Some(&j) = first_holder.get(&t) {
                uf.union(i, j);
            } else {
                first_holder.insert(t, i);
            }
        }
    }
    let mut components: Vec<Vec<String>> = uf
        .components()
        .into_iter()
        .map(|c| c.into_iter().map(|i| prop(g, docs[i], "doc_id").to_string()).collect())
        .collect();
    for c in &mut components {
        c.sort();
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let connected = components.len() <= 1;
    let mut isolated_documents: Vec<String> = components.iter().skip(1).flatten().cloned().collect();
    isolated_documents.sort();
    Ok(CompletenessReport {
        databook_id: databook_id.to_string(),
        is_complete: missing.is_empty() && connected,
        missing_doc_types: missing,
        isolated_documents,
        connected,
        components,
    })
}

// ---------------------------------------------------------------------------
// conformance

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    NumericRange {
        min: f64,
        max: f64,
        #[serde(default)]
        units: Option<String>,
    },
    RegexMatch {
        pattern: String,
    },
    ValueInSet {
        values: Vec<String>,
    },
    RequiredPresent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformanceRule {
    pub rule_id: String,
    pub doc_type: DocType,
    pub field_key: String,
    pub check: Check,
    #[serde(default)]
    pub standard_ref: String,
}

impl ConformanceRule {
    pub fn validate(&self) -> Result<(), InspectionError> {
        let bad = |message: String| InspectionError::InvalidRule {
            rule_id: self.rule_id.clone(),
            message,
        };
        match &self.check {
            Check::NumericRange { min, max, .. } => {
                if !(min.is_finite() && max.is_finite()) || min > max {
                    return Err(bad(format!("range [{min}, {max}] is empty or not finite")));
                }
            }
            Check::RegexMatch { pattern } => {
                Regex::new(pattern).map_err(|e| bad(e.to_string()))?;
            }
            Check::ValueInSet { values } if values.is_empty() => return Err(bad("empty value set".into())),
            _ => {}
        }
        Ok(())
    }
}

/// Parses and validates a JSON array of rules.
pub fn parse_rules(json: &str) -> Result<Vec<ConformanceRule>, InspectionError> {
    let rules: Vec<ConformanceRule> =
        serde_json::from_str(json).map_err(|e| InspectionError::RulesFormat(e.to_string()))?;
    for r in &rules {
        r.validate()?;
    }
    Ok(rules)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceResult {
    pub doc_id: String,
    pub rule_id: String,
    pub outcome: Outcome,
    pub detail: String,
}

/// Reads a decimal with either `.` or `,` as separator, after removing an
/// optional trailing unit.
pub fn parse_decimal(raw: &str, units: Option<&str>) -> Option<f64> {
    let mut s = raw.trim();
    if let Some(u) = units.filter(|u| !u.is_empty()) {
        let lower = s.to_lowercase();
        if lower.ends_with(&u.to_lowercase()) {
            s = s[..s.len() - u.len()].trim_end();
        }
    }
    let cleaned: String = match (s.rfind('.'), s.rfind(',')) {
        // both present: the later one is the decimal point
        (Some(dot), Some(comma)) if comma > dot => s.replace('.', "").replace(',', "."),
        (Some(_), Some(_)) => s.replace(',', ""),
        (None, Some(_)) if s.matches(',').count() == 1 => s.replace(',', "."),
        _ => s.to_string(),
    };
    if cleaned.is_empty() || !cleaned.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
        return None;
    }
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn evaluate(rule: &ConformanceRule, regex: Option<&Regex>, value: Option<&str>) -> (Outcome, String) {
    let value = value.map(str::trim).filter(|v| !v.is_empty());
    match (&rule.check, value) {
        (Check::RequiredPresent, Some(_)) => (Outcome::Pass, "present".into()),
        (Check::RequiredPresent, None) => (Outcome::Fail, format!("field `{}` missing", rule.field_key)),
        (_, None) => (Outcome::Inapplicable, format!("field `{}` missing", rule.field_key)),
        (Check::NumericRange { min, max, units }, Some(v)) => match parse_decimal(v, units.as_deref()) {
            None => (Outcome::Fail, "unparseable".into()),
            Some(x) if x >= *min && x <= *max => (Outcome::Pass, format!("{x} in [{min}, {max}]")),
            Some(x) => (Outcome::Fail, format!("{x} outside [{min}, {max}]")),
        },
        (Check::RegexMatch { pattern }, Some(v)) => {
            if regex.is_some_and(|r| r.is_match(v)) {
                (Outcome::Pass, format!("matches /{pattern}/"))
            } else {
                (Outcome::Fail, format!("`{v}` does not match /{pattern}/"))
            }
        }
        (Check::ValueInSet { values }, Some(v)) => {
            if values.iter().any(|s| s == v) {
                (Outcome::Pass, format!("`{v}` allowed"))
            } else {
                (Outcome::Fail, format!("`{v}` not in allowed set"))
            }
        }
    }
}

/// One result per (rule, document of the rule's type), rules in input
/// order and documents in set order.
pub fn check_conformance(ds: &DocumentSet, rules: &[ConformanceRule]) -> Result<Vec<ConformanceResult>, InspectionError> {
    let mut out = Vec::new();
    for rule in rules {
        rule.validate()?;
        let regex = match &rule.check {
            Check::RegexMatch { pattern } => Some(Regex::new(&format!("^(?:{pattern})$")).expect("validated")),
            _ => None,
        };
        for doc in ds.documents().iter().filter(|d| d.doc_type == rule.doc_type) {
            let value = doc.field(&rule.field_key).map(|b| b.value.as_str());
            let (outcome, detail) = evaluate(rule, regex.as_ref(), value);
            out.push(ConformanceResult {
                doc_id: doc.doc_id.clone(),
                rule_id: rule.rule_id.clone(),
                outcome,
                detail,
            });
        }
    }
    Ok(out)
}

/// True when no result is a failure.
pub fn all_conformant(results: &[ConformanceResult]) -> bool {
    results.iter().all(|r| r.outcome != Outcome::Fail)
}

// ---------------------------------------------------------------------------
// traceability

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub node: NodeId,
    pub label: Label,
    /// `doc_id` for documents, `key=value` for topics.
    pub name: String,
    /// Document hops from the root.
    pub depth: usize,
    pub via: Option<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrokenLink {
    pub doc_id: String,
    pub key: String,
    pub value: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub root: String,
    pub max_depth: usize,
    pub visited: Vec<TraceStep>,
    pub broken_links: Vec<BrokenLink>,
    pub incomplete_databooks: Vec<String>,
    pub complete_trace: bool,
}

impl TraceReport {
    pub fn visited_documents(&self) -> impl Iterator<Item = &str> {
        self.visited
            .iter()
            .filter(|s| s.label == Label::Document)
            .map(|s| s.name.as_str())
    }
}

fn documents_of_topic(g: &PropertyGraph, topic: NodeId) -> BTreeSet<NodeId> {
    g.in_edges(topic)
        .iter()
        .filter_map(|e| g.edge(*e))
        .map(|e| e.src)
        .filter(|d| g.node(*d).is_some_and(|n| n.label == Label::Document))
        .collect()
}

/// Breadth-first walk document -> topic -> document from `root_doc`.
///
/// A topic referenced by a single document is a broken link, and every
/// databook containing a visited document must itself be complete.
pub fn trace(g: &PropertyGraph, root_doc: &str, max_depth: usize) -> Result<TraceReport, InspectionError> {
    if max_depth == 0 {
        return Err(InspectionError::ZeroDepth);
    }
    let root = document_node(g, root_doc)?;
    let mut visited = vec![TraceStep {
        node: root,
        label: Label::Document,
        name: root_doc.to_string(),
        depth: 0,
        via: None,
    }];
    let mut seen: BTreeSet<NodeId> = BTreeSet::from([root]);
    let mut docs = vec![root];
    let mut queue = VecDeque::from([(root, 0usize)]);
    while let Some((doc, depth)) = queue.pop_front() {
        if depth >= max_depth {
            continue;
        }
        for e in g.out_edges(doc).iter().filter_map(|e| g.edge(*e)) {
            let topic = e.dst;
            if g.node(topic).is_none_or(|n| n.label != Label::Topic) || !seen.insert(topic) {
                continue;
            }
            visited.push(TraceStep {
                node: topic,
                label: Label::Topic,
                name: format!("{}={}", prop(g, topic, "key"), prop(g, topic, "value")),
                depth,
                via: Some(e.id),
            });
            for back in g.in_edges(topic).iter().filter_map(|e| g.edge(*e)) {
                let next = back.src;
                if g.node(next).is_none_or(|n| n.label != Label::Document) || !seen.insert(next) {
                    continue;
                }
                visited.push(TraceStep {
                    node: next,
                    label: Label::Document,
                    name: prop(g, next, "doc_id").to_string(),
                    depth: depth + 1,
                    via: Some(back.id),
                });
                docs.push(next);
                queue.push_back((next, depth + 1));
            }
        }
    }

    let mut broken_links = Vec::new();
    let mut books: BTreeSet<String> = BTreeSet::new();
    for &doc in &docs {
        let mut reported = BTreeSet::new();
        for e in g.out_edges(doc).iter().filter_map(|e| g.edge(*e)) {
            let topic = e.dst;
            if g.node(topic).is_none_or(|n| n.label != Label::Topic) || !reported.insert(topic) {
                continue;
            }
            if documents_of_topic(g, topic).len() == 1 {
                broken_links.push(BrokenLink {
                    doc_id: prop(g, doc, "doc_id").to_string(),
                    key: prop(g, topic, "key").to_string(),
                    value: prop(g, topic, "value").to_string(),
                    reason: "no other document references this topic".into(),
                });
            }
        }
        for e in g.in_edges(doc).iter().filter_map(|e| g.edge(*e)) {
            if e.rel_type == CONTAINS && g.node(e.src).is_some_and(|n| n.label == Label::Databook) {
                books.insert(prop(g, e.src, "databook_id").to_string());
            }
        }
    }
    let mut incomplete_databooks = Vec::new();
    for book in books {
        if !check_databook(g, &book)?.is_complete {
            incomplete_databooks.push(book);
        }
    }
    Ok(TraceReport {
        root: root_doc.to_string(),
        max_depth,
        complete_trace: broken_links.is_empty() && incomplete_databooks.is_empty(),
        visited,
        broken_links,
        incomplete_databooks,
    })
}

// ---------------------------------------------------------------------------
// OCR accuracy

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcrClass {
    TotalHit,
    PartialHit,
    Inconsistency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcrAccuracyLabel {
    pub class: OcrClass,
    pub similarity: f64,
}

/// Case and separator folding only; stopwords are kept, since dropping
/// them would turn "Inc" vs "Ltd" into a perfect read.
pub fn ocr_compare_config() -> FilterConfig {
    FilterConfig {
        stopwords: BTreeSet::new(),
        ..FilterConfig::default()
    }
}

pub fn classify_ocr_accuracy(ocr_value: &str, truth_value: &str) -> Result<OcrAccuracyLabel, InspectionError> {
    classify_ocr_accuracy_with(ocr_value, truth_value, &ocr_compare_config(), DEFAULT_PARTIAL_THRESHOLD)
}

pub fn classify_ocr_accuracy_with(
    ocr_value: &str,
    truth_value: &str,
    cfg: &FilterConfig,
    partial_threshold: f64,
) -> Result<OcrAccuracyLabel, InspectionError> {
    if truth_value.trim().is_empty() {
        return Err(InspectionError::EmptyTruth);
    }
    // Values made only of separators have no normalized form; fall back
    // to comparing them case-folded.
    let (ocr, truth) = match normalize_tokens(truth_value, cfg) {
        Ok(t) => (normalize_tokens(ocr_value, cfg).unwrap_or_default(), t),
        Err(_) => (ocr_value.trim().to_lowercase(), truth_value.trim().to_lowercase()),
    };
    let similarity = sequence_matcher_ratio(&ocr, &truth, &cfg.junk_chars);
    let class = if similarity >= 1.0 {
        OcrClass::TotalHit
    } else if similarity >= partial_threshold {
        OcrClass::PartialHit
    } else {
        OcrClass::Inconsistency
    };
    Ok(OcrAccuracyLabel { class, similarity })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub fields: usize,
    pub total_hit_pct: f64,
    pub partial_pct: f64,
    pub inconsistency_pct: f64,
}

pub fn corpus_accuracy_summary(labels: &[OcrAccuracyLabel]) -> Result<AccuracySummary, InspectionError> {
    if labels.is_empty() {
        return Err(InspectionError::EmptyCorpus);
    }
    let mut counts: BTreeMap<OcrClass, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.class).or_default() += 1;
    }
    let pct = |c| 100.0 * *counts.get(&c).unwrap_or(&0) as f64 / labels.len() as f64;
    Ok(AccuracySummary {
        fields: labels.len(),
        total_hit_pct: pct(OcrClass::TotalHit),
        partial_pct: pct(OcrClass::PartialHit),
        inconsistency_pct: pct(OcrClass::Inconsistency),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrPair {
    pub ocr: String,
    pub truth: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disambiguation::disambiguate;
    use crate::graph::build_graph;
    use crate::ingest::{extract_entities, parse_loader_json, TopicKeys};
    use proptest::prelude::*;

    fn build(json: &str) -> (DocumentSet, PropertyGraph) {
        let ds = parse_loader_json(json.as_bytes()).unwrap();
        let report = disambiguate(&extract_entities(&ds, &TopicKeys::LinkHinted), &FilterConfig::default()).unwrap();
        let g = build_graph(&ds, &report).unwrap();
        (ds, g)
    }

    fn doc(id: &str, ty: &str, links: &[(&str, &str)], plain: &[(&str, &str)]) -> String {
        let block = |(k, v): &(&str, &str), link: bool| {
            format!(r#"{{"key":"{k}","value":"{v}","box":{{"x":0,"y":0,"w":1,"h":1}},"link":{link}}}"#)
        };
        let blocks: Vec<String> = links
            .iter()
            .map(|p| block(p, true))
            .chain(plain.iter().map(|p| block(p, false)))
            .collect();
        format!(
            r#"{{"doc_id":"{id}","doc_type":"{ty}","source_file":"{id}.pdf","blocks":[{}]}}"#,
            blocks.join(",")
        )
    }

    fn set(docs: &[String], books: &[(&str, &[&str], &[&str])]) -> String {
        let books: Vec<String> = books
            .iter()
            .map(|(id, members, req)| {
                format!(
                    r#"{{"databook_id":"{id}","document_ids":{},"required_doc_types":{}}}"#,
                    serde_json::to_string(members).unwrap(),
                    serde_json::to_string(req).unwrap()
                )
            })
            .collect();
        format!(r#"{{"documents":[{}],"databooks":[{}]}}"#, docs.join(","), books.join(","))
    }

    #[test]
    fn linked_pair_with_no_requirements_is_complete() {
        let (_, g) = build(&set(
            &[
                doc("A", "generic", &[("OS_LOTE", "L-1")], &[]),
                doc("B", "generic", &[("OS_LOTE", "L-1")], &[]),
            ],
            &[("B1", &["A", "B"], &[])],
        ));
        let r = check_databook(&g, "B1").unwrap();
        assert!(r.is_complete && r.connected);
        assert!(r.isolated_documents.is_empty());
        assert!(matches!(check_databook(&g, "nope"), Err(InspectionError::UnknownDatabook(_))));
    }

    #[test]
    fn missing_type_and_split_components() {
        let (_, g) = build(&set(
            &[
                doc("A", "purchase-order", &[("OS_LOTE", "L-1")], &[]),
                doc("B", "generic", &[("OS_LOTE", "L-1")], &[]),
                doc("C", "generic", &[("LAB", "QA-7")], &[]),
                doc("D", "generic", &[("LAB", "QA-7")], &[]),
            ],
            &[("B1", &["A", "B", "C", "D"], &["purchase-order", "test-report"])],
        ));
        let r = check_databook(&g, "B1").unwrap();
        assert!(!r.is_complete && !r.connected);
        assert_eq!(r.missing_doc_types, vec![DocType::TestReport]);
        // equal-sized groups: the one holding A is the main body
        assert_eq!(r.isolated_documents, vec!["C".to_string(), "D".to_string()]);
        assert_eq!(r.components.len(), 2);
    }

    #[test]
    fn conformance_cases() {
        let ds = parse_loader_json(
            set(
                &[
                    doc("M1", "material-certificate", &[], &[("YIELD_MPA", "250")]),
                    doc("M2", "material-certificate", &[], &[("YIELD_MPA", "25O")]),
                    doc("M3", "material-certificate", &[], &[("YIELD_MPA", "212,5 MPa")]),
                    doc("M4", "material-certificate", &[], &[]),
                    doc("P1", "purchase-order", &[], &[]),
                ],
                &[],
            )
            .as_bytes(),
        )
        .unwrap();
        let rules = parse_rules(
            r#"[{"rule_id":"Y","doc_type":"material-certificate","field_key":"YIELD_MPA",
                 "check":{"kind":"numeric_range","min":200,"max":300,"units":"MPa"},"standard_ref":"ASTM B16"},
                {"rule_id":"REQ","doc_type":"material-certificate","field_key":"YIELD_MPA","check":{"kind":"required_present"}}]"#,
        )
        .unwrap();
        let res = check_conformance(&ds, &rules).unwrap();
        assert_eq!(res.len(), 8);
        let out: Vec<_> = res.iter().map(|r| r.outcome).collect();
        use Outcome::*;
        assert_eq!(out, vec![Pass, Fail, Pass, Inapplicable, Pass, Pass, Pass, Fail]);
        assert_eq!(res[1].detail, "unparseable");
        assert!(!all_conformant(&res));

        assert!(parse_rules(r#"[{"rule_id":"X","doc_type":"generic","field_key":"K","check":{"kind":"numeric_range","min":3,"max":1}}]"#).is_err());
        assert!(parse_rules(r#"[{"rule_id":"X","doc_type":"generic","field_key":"K","check":{"kind":"regex_match","pattern":"("}}]"#).is_err());
    }

    #[test]
    fn regex_and_set_checks() {
        let ds = parse_loader_json(
            set(&[doc("T", "test-report", &[], &[("GRADE", "X52"), ("HEAT", "H-1234")])], &[]).as_bytes(),
        )
        .unwrap();
        let rules = vec![
            ConformanceRule {
                rule_id: "G".into(),
                doc_type: DocType::TestReport,
                field_key: "GRADE".into(),
                check: Check::ValueInSet { values: vec!["X52".into(), "X60".into()] },
                standard_ref: String::new(),
            },
            ConformanceRule {
                rule_id: "H".into(),
                doc_type: DocType::TestReport,
                field_key: "HEAT".into(),
                check: Check::RegexMatch { pattern: r"H-\d{3}".into() },
                standard_ref: String::new(),
            },
        ];
        let res = check_conformance(&ds, &rules).unwrap();
        assert_eq!(res[0].outcome, Outcome::Pass);
        // anchored: four digits do not match a three-digit pattern
        assert_eq!(res[1].outcome, Outcome::Fail);
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("250", None), Some(250.0));
        assert_eq!(parse_decimal(" 12,5 ", None), Some(12.5));
        assert_eq!(parse_decimal("1.234,5", None), Some(1234.5));
        assert_eq!(parse_decimal("1,234.5", None), Some(1234.5));
        assert_eq!(parse_decimal("300 mpa", Some("MPa")), Some(300.0));
        assert_eq!(parse_decimal("25O", None), None);
        assert_eq!(parse_decimal("", None), None);
        assert_eq!(parse_decimal("inf", None), None);
    }

    fn chain() -> PropertyGraph {
        build(&set(
            &[
                doc("D1", "generic", &[("K1", "t1")], &[]),
                doc("D2", "generic", &[("K1", "t1"), ("K2", "t2")], &[]),
                doc("D3", "generic", &[("K2", "t2"), ("K3", "t3")], &[]),
                doc("D4", "generic", &[("K3", "t3")], &[]),
            ],
            &[],
        ))
        .1
    }

    #[test]
    fn trace_depth_limit() {
        let g = chain();
        let r = trace(&g, "D1", 2).unwrap();
        assert_eq!(r.visited_documents().collect::<Vec<_>>(), vec!["D1", "D2", "D3"]);
        assert!(r.complete_trace);
        let full = trace(&g, "D1", DEFAULT_TRACE_DEPTH).unwrap();
        assert_eq!(full.visited_documents().count(), 4);
        assert!(matches!(trace(&g, "D9", 2), Err(InspectionError::UnknownNode(_))));
        assert!(matches!(trace(&g, "D1", 0), Err(InspectionError::ZeroDepth)));
    }

    #[test]
    fn trace_flags_unmatched_reference_and_incomplete_book() {
        let (_, g) = build(&set(
            &[
                doc("A", "purchase-order", &[("OS_LOTE", "L-1"), ("PEDIDO", "PO-77")], &[]),
                doc("B", "material-certificate", &[("OS_LOTE", "L-1")], &[]),
            ],
            &[("B1", &["A", "B"], &["test-report"])],
        ));
        let r = trace(&g, "B", 4).unwrap();
        assert_eq!(r.visited_documents().collect::<Vec<_>>(), vec!["B", "A"]);
        assert_eq!(r.broken_links.len(), 1);
        assert_eq!((r.broken_links[0].doc_id.as_str(), r.broken_links[0].key.as_str()), ("A", "PEDIDO"));
        assert_eq!(r.incomplete_databooks, vec!["B1".to_string()]);
        assert!(!r.complete_trace);
    }

    #[test]
    fn ocr_classes() {
        let same = classify_ocr_accuracy("Vallourec", "Vallourec").unwrap();
        assert_eq!((same.class, same.similarity), (OcrClass::TotalHit, 1.0));
        let none = classify_ocr_accuracy("xyz", "abc").unwrap();
        assert_eq!((none.class, none.similarity), (OcrClass::Inconsistency, 0.0));
        assert_eq!(classify_ocr_accuracy("L-4431", "L-443l").unwrap().class, OcrClass::PartialHit);
        assert_eq!(classify_ocr_accuracy("---", "---").unwrap().class, OcrClass::TotalHit);
        assert!(matches!(classify_ocr_accuracy("x", "  "), Err(InspectionError::EmptyTruth)));
    }

    #[test]
    fn summaries() {
        let l = |class| OcrAccuracyLabel { class, similarity: 0.0 };
        let all = corpus_accuracy_summary(&[l(OcrClass::TotalHit); 4]).unwrap();
        assert_eq!((all.total_hit_pct, all.partial_pct, all.inconsistency_pct), (100.0, 0.0, 0.0));
        let each = corpus_accuracy_summary(&[l(OcrClass::TotalHit), l(OcrClass::PartialHit), l(OcrClass::Inconsistency)]).unwrap();
        assert_eq!(format!("{:.2}", each.partial_pct), "33.33");
        assert!(matches!(corpus_accuracy_summary(&[]), Err(InspectionError::EmptyCorpus)));
    }

    proptest! {
        #[test]
        fn identical_values_are_total_hits(x in "\\PC{1,20}") {
            prop_assume!(!x.trim().is_empty());
            prop_assert_eq!(classify_ocr_accuracy(&x, &x).unwrap().class, OcrClass::TotalHit);
        }

        #[test]
        fn adding_an_unlinked_document_disconnects(n in 1usize..6) {
            let mut docs: Vec<String> = (0..n).map(|i| doc(&format!("D{i}"), "generic", &[("OS_LOTE", "L-1")], &[])).collect();
            docs.push(doc("X", "generic", &[], &[("QTY", "3")]));
            let ids: Vec<String> = (0..n).map(|i| format!("D{i}")).collect();
            let mut with_x: Vec<&str> = ids.iter().map(String::as_str).collect();
            let base = with_x.clone();
            with_x.push("X");
            let (_, g) = build(&set(&docs, &[("B", &base, &[]), ("BX", &with_x, &[])]));
            prop_assert!(check_databook(&g, "B").unwrap().is_complete);
            let r = check_databook(&g, "BX").unwrap();
            prop_assert!(!r.connected);
            prop_assert_eq!(r.isolated_documents, vec!["X".to_string()]);
        }

        #[test]
        fn trace_is_monotone_in_depth(d in 1usize..5) {
            let g = chain();
            let a: BTreeSet<NodeId> = trace(&g, "D1", d).unwrap().visited.iter().map(|s| s.node).collect();
            let b: BTreeSet<NodeId> = trace(&g, "D1", d + 1).unwrap().visited.iter().map(|s| s.node).collect();
            prop_assert!(a.is_subset(&b));
        }
    }
}
