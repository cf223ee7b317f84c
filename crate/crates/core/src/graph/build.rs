//! Turning a document set plus its disambiguation report into graph form.
//!
//! * one `document` node per document (`doc_id`, `doc_type`, `source_file`);
//! * one `topic` node per canonical `(key, value)`, shared by every document
//!   mentioning it;
//! * a `document -> topic` edge per mention, typed by the field key and
//!   carrying the raw spelling as `raw_value`;
//! * one `databook` node per databook with `contains` edges to its members.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{props, GraphError, Label, NodeId, PropertyGraph};
use crate::disambiguation::DisambiguationReport;
use crate::ingest::DocumentSet;

pub const DEFAULT_INDEXED_KEYS: &[&str] = &["doc_id", "databook_id", "value", "uid"];

pub const CONTAINS: &str = "contains";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub documents: usize,
    pub databooks: usize,
    pub mentions: usize,
    pub topics_created: usize,
}

/// Builds a fresh graph with the default indexes.
pub fn build_graph(ds: &DocumentSet, report: &DisambiguationReport) -> Result<PropertyGraph, GraphError> {
    let mut g = PropertyGraph::with_indexes(DEFAULT_INDEXED_KEYS.iter().copied());
    build_into(&mut g, ds, report)?;
    Ok(g)
}

/// Adds `ds` to an existing graph, reusing topic nodes already present.
///
/// Fails without touching `g` when a document or databook id is already
/// in the graph.
pub fn build_into(
    g: &mut PropertyGraph,
    ds: &DocumentSet,
    report: &DisambiguationReport,
) -> Result<BuildSummary, GraphError> {
    for doc in ds.documents() {
        if !g.find_nodes(Label::Document, "doc_id", &doc.doc_id).is_empty() {
            return Err(GraphError::DuplicateDocument(doc.doc_id.clone()));
        }
    }
    for book in ds.databooks() {
        if !g.find_nodes(Label::Databook, "databook_id", &book.databook_id).is_empty() {
            return Err(GraphError::DuplicateDatabook(book.databook_id.clone()));
        }
    }

    let mut summary = BuildSummary::default();
    let doc_nodes: Vec<NodeId> = ds
        .documents()
        .iter()
        .map(|doc| {
            g.create_node(
                Label::Document,
                props([
                    ("doc_id", doc.doc_id.as_str()),
                    ("doc_type", doc.doc_type.as_str()),
                    ("source_file", doc.source_file.as_str()),
                ]),
            )
        })
        .collect();
    summary.documents = doc_nodes.len();

    for (doc, &doc_node) in ds.documents().iter().zip(&doc_nodes) {
        for block in &doc.blocks {
            let Some(canonical) = report.canonical(&block.key, &block.value) else {
                continue;
            };
            let pattern = props([("key", block.key.as_str()), ("value", canonical)]);
            let (topic, created) = g.merge_node(Label::Topic, &pattern)?;
            summary.topics_created += usize::from(created);
            g.create_edge(doc_node, topic, block.key.clone(), props([("raw_value", block.value.as_str())]))?;
            summary.mentions += 1;
        }
    }

    let node_of: HashMap<&str, NodeId> = ds
        .documents()
        .iter()
        .map(|d| d.doc_id.as_str())
        .zip(doc_nodes.iter().copied())
        .collect();
    for book in ds.databooks() {
        let required: Vec<&str> = book.required_doc_types.iter().map(|t| t.as_str()).collect();
        let book_node = g.create_node(
            Label::Databook,
            props([
                ("databook_id", book.databook_id.clone()),
                ("required_doc_types", required.join(",")),
            ]),
        );
        for doc_id in &book.document_ids {
            let member = node_of[doc_id.as_str()];
            g.create_edge(book_node, member, CONTAINS, Default::default())?;
        }
        summary.databooks += 1;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disambiguation::{disambiguate, FilterConfig};
    use crate::graph::{traverse, TraversalQuery};
    use crate::ingest::{extract_entities, parse_loader_json, TopicKeys};

    fn two_docs_one_batch() -> DocumentSet {
        parse_loader_json(
            br#"{"documents":[
              {"doc_id":"PO-1","doc_type":"purchase-order","source_file":"po.pdf","blocks":[
                {"key":"OS_LOTE","value":"L-1","box":{"x":0,"y":0,"w":5,"h":5},"link":true},
                {"key":"QTY","value":"40","box":{"x":0,"y":9,"w":5,"h":5}}]},
              {"doc_id":"MC-1","doc_type":"material-certificate","source_file":"mc.pdf","blocks":[
                {"key":"OS_LOTE","value":"L-1","box":{"x":0,"y":0,"w":5,"h":5},"link":true}]}],
             "databooks":[{"databook_id":"B1","document_ids":["PO-1","MC-1"],"required_doc_types":["purchase-order"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn shared_batch_becomes_one_topic() {
        let ds = two_docs_one_batch();
        let mentions = extract_entities(&ds, &TopicKeys::LinkHinted);
        let report = disambiguate(&mentions, &FilterConfig::default()).unwrap();
        let g = build_graph(&ds, &report).unwrap();
        assert_eq!(g.label_count(Label::Document), 2);
        assert_eq!(g.label_count(Label::Topic), 1);
        assert_eq!(g.label_count(Label::Databook), 1);
        let q = TraversalQuery {
            dst_label: Some(Label::Topic),
            ..Default::default()
        };
        assert_eq!(traverse(&g, &q).unwrap().len(), 2);
        assert_eq!(g.edge_count(), 4);
        // numbering follows input order
        assert_eq!(g.node(NodeId(0)).unwrap().props["doc_id"], "PO-1");
        assert!(g.audit().is_clean());
    }

    #[test]
    fn second_build_is_rejected_and_leaves_graph_alone() {
        let ds = two_docs_one_batch();
        let mentions = extract_entities(&ds, &TopicKeys::LinkHinted);
        let report = disambiguate(&mentions, &FilterConfig::default()).unwrap();
        let mut g = build_graph(&ds, &report).unwrap();
        let before = g.node_count();
        assert!(matches!(
            build_into(&mut g, &ds, &report),
            Err(GraphError::DuplicateDocument(_))
        ));
        assert_eq!(g.node_count(), before);
    }
}
