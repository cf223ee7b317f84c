//! Embedded property-graph store.
//!
//! Nodes and edges live in dense vectors indexed by their id; ids are
//! allocated monotonically and never reused, so a deleted slot stays
//! `None`. Each node keeps outgoing and incoming edge lists, nodes are
//! indexed by label, and property keys declared as indexed get a
//! value -> node hash index.

mod build;
mod persist;
mod store;
mod traverse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use build::{build_graph, build_into, BuildSummary, CONTAINS, DEFAULT_INDEXED_KEYS};
pub use persist::{load, load_with_indexes, read_graph, save, write_graph, MAGIC};
pub use store::GraphStore;
pub use traverse::{traverse, PropFilter, PropTarget, TraversalQuery, Triple};

pub type Props = BTreeMap<String, String>;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("{count} nodes match the merge pattern")]
    AmbiguousMerge { count: usize },
    #[error("merge pattern is empty")]
    EmptyMergePattern,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("document `{0}` is already in the graph")]
    DuplicateDocument(String),
    #[error("databook `{0}` is already in the graph")]
    DuplicateDatabook(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl NodeId {
    fn slot(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    fn slot(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Document,
    Topic,
    Databook,
    Synthetic,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Document, Label::Topic, Label::Databook, Label::Synthetic];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Document => "document",
            Label::Topic => "topic",
            Label::Databook => "databook",
            Label::Synthetic => "synthetic",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: Label,
    pub props: Props,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub rel_type: String,
    pub props: Props,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub discrepancies: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: Vec<Option<Node>>,
    edges: Vec<Option<Edge>>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    label_index: BTreeMap<Label, BTreeSet<NodeId>>,
    indexed_keys: BTreeSet<String>,
    prop_index: HashMap<String, HashMap<String, BTreeSet<NodeId>>>,
    node_count: usize,
    edge_count: usize,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_indexes<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new();
        for k in keys {
            g.declare_index(k);
        }
        g
    }

    /// Adds a hash index on `key`, backfilling existing nodes.
    pub fn declare_index(&mut self, key: impl Into<String>) {
        let key = key.into();
        if !self.indexed_keys.insert(key.clone()) {
            return;
        }
        let mut idx: HashMap<String, BTreeSet<NodeId>> = HashMap::new();
        for node in self.nodes.iter().flatten() {
            if let Some(v) = node.props.get(&key) {
                idx.entry(v.clone()).or_default().insert(node.id);
            }
        }
        self.prop_index.insert(key, idx);
    }

    pub fn indexed_keys(&self) -> &BTreeSet<String> {
        &self.indexed_keys
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    /// One past the largest node id ever allocated.
    pub fn node_id_bound(&self) -> u64 {
        self.nodes.len() as u64
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.slot()).and_then(Option::as_ref)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id.slot()).and_then(Option::as_ref)
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.node(id).is_some()
    }

    /// Live nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().flatten()
    }

    /// Live edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().flatten()
    }

    pub fn out_edges(&self, id: NodeId) -> &[EdgeId] {
        self.out_adj.get(id.slot()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn in_edges(&self, id: NodeId) -> &[EdgeId] {
        self.in_adj.get(id.slot()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.out_edges(id).len() + self.in_edges(id).len()
    }

    pub fn nodes_with_label(&self, label: Label) -> impl Iterator<Item = NodeId> + '_ {
        self.label_index
            .get(&label)
            .into_iter()
            .flat_map(|s| s.iter().copied())
    }

    pub fn label_count(&self, label: Label) -> usize {
        self.label_index.get(&label).map_or(0, BTreeSet::len)
    }

    pub fn label_histogram(&self) -> BTreeMap<Label, usize> {
        self.label_index
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(l, s)| (*l, s.len()))
            .collect()
    }

    /// Nodes with `label` whose `key` equals `value`, via the index when
    /// the key is indexed.
    pub fn find_nodes(&self, label: Label, key: &str, value: &str) -> Vec<NodeId> {
        if let Some(idx) = self.prop_index.get(key) {
            return idx
                .get(value)
                .into_iter()
                .flatten()
                .copied()
                .filter(|id| self.node(*id).is_some_and(|n| n.label == label))
                .collect();
        }
        self.nodes_with_label(label)
            .filter(|id| {
                self.node(*id)
                    .is_some_and(|n| n.props.get(key).map(String::as_str) == Some(value))
            })
            .collect()
    }

    pub fn create_node(&mut self, label: Label, props: Props) -> NodeId {
        let id = NodeId(self.nodes.len() as u64);
        self.insert_node(Node { id, label, props });
        id
    }

    fn insert_node(&mut self, node: Node) {
        let slot = node.id.slot();
        if self.nodes.len() <= slot {
            self.nodes.resize(slot + 1, None);
            self.out_adj.resize_with(slot + 1, Vec::new);
            self.in_adj.resize_with(slot + 1, Vec::new);
        }
        self.label_index.entry(node.label).or_default().insert(node.id);
        for (k, v) in &node.props {
            if let Some(idx) = self.prop_index.get_mut(k) {
                idx.entry(v.clone()).or_default().insert(node.id);
            }
        }
        self.nodes[slot] = Some(node);
        self.node_count += 1;
    }

    pub fn create_edge(
        &mut self,
        src: NodeId,
        dst: NodeId,
        rel_type: impl Into<String>,
        props: Props,
    ) -> Result<EdgeId, GraphError> {
        for end in [src, dst] {
            if !self.contains_node(end) {
                return Err(GraphError::UnknownNode(end));
            }
        }
        let id = EdgeId(self.edges.len() as u64);
        self.insert_edge(Edge {
            id,
            src,
            dst,
            rel_type: rel_type.into(),
            props,
        });
        Ok(id)
    }

    fn insert_edge(&mut self, edge: Edge) {
        let slot = edge.id.slot();
        if self.edges.len() <= slot {
            self.edges.resize(slot + 1, None);
        }
        self.out_adj[edge.src.slot()].push(edge.id);
        self.in_adj[edge.dst.slot()].push(edge.id);
        self.edges[slot] = Some(edge);
        self.edge_count += 1;
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<Edge, GraphError> {
        let edge = self
            .edges
            .get_mut(id.slot())
            .and_then(Option::take)
            .ok_or(GraphError::UnknownEdge(id))?;
        self.out_adj[edge.src.slot()].retain(|e| *e != id);
        self.in_adj[edge.dst.slot()].retain(|e| *e != id);
        self.edge_count -= 1;
        Ok(edge)
    }

    /// Removes a node and every incident edge; returns how many edges went
    /// with it.
    pub fn delete_node(&mut self, id: NodeId) -> Result<usize, GraphError> {
        if !self.contains_node(id) {
            return Err(GraphError::UnknownNode(id));
        }
        let mut incident: Vec<EdgeId> = self.out_adj[id.slot()]
            .iter()
            .chain(self.in_adj[id.slot()].iter())
            .copied()
            .collect();
        incident.sort_unstable();
        incident.dedup();
        for e in &incident {
            self.delete_edge(*e)?;
        }
        let node = self.nodes[id.slot()].take().expect("checked above");
        if let Some(set) = self.label_index.get_mut(&node.label) {
            set.remove(&id);
        }
        for (k, v) in &node.props {
            self.unindex(k, v, id);
        }
        self.node_count -= 1;
        Ok(incident.len())
    }

    fn unindex(&mut self, key: &str, value: &str, id: NodeId) {
        if let Some(idx) = self.prop_index.get_mut(key) {
            if let Some(set) = idx.get_mut(value) {
                set.remove(&id);
                if set.is_empty() {
                    idx.remove(value);
                }
            }
        }
    }

    /// Sets one property on a node; the label cannot change.
    pub fn set_node_prop(
        &mut self,
        id: NodeId,
        key: impl Into<String>,
        value: impl Into<String>,
    ) -> Result<(), GraphError> {
        let (key, value) = (key.into(), value.into());
        let old = {
            let node = self
                .nodes
                .get_mut(id.slot())
                .and_then(Option::as_mut)
                .ok_or(GraphError::UnknownNode(id))?;
            node.props.insert(key.clone(), value.clone())
        };
        if let Some(old) = old {
            self.unindex(&key, &old, id);
        }
        if let Some(idx) = self.prop_index.get_mut(&key) {
            idx.entry(value).or_default().insert(id);
        }
        Ok(())
    }

    /// Returns the single node with `label` carrying all `match_props`,
    /// creating it when none exists.
    pub fn merge_node(&mut self, label: Label, match_props: &Props) -> Result<(NodeId, bool), GraphError> {
        let matches = self.matching_nodes(label, match_props)?;
        match matches.len() {
            0 => Ok((self.create_node(label, match_props.clone()), true)),
            1 => Ok((matches[0], false)),
            count => Err(GraphError::AmbiguousMerge { count }),
        }
    }

    fn matching_nodes(&self, label: Label, match_props: &Props) -> Result<Vec<NodeId>, GraphError> {
        let (first_key, first_val) = match_props
            .iter()
            .find(|(k, _)| self.indexed_keys.contains(*k))
            .or_else(|| match_props.iter().next())
            .ok_or(GraphError::EmptyMergePattern)?;
        Ok(self
            .find_nodes(label, first_key, first_val)
            .into_iter()
            .filter(|id| {
                let props = &self.node(*id).expect("index holds live nodes").props;
                match_props.iter().all(|(k, v)| props.get(k) == Some(v))
            })
            .collect())
    }

    /// Undirected neighbours (both edge directions), duplicates removed,
    /// ascending.
    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .out_edges(id)
            .iter()
            .filter_map(|e| self.edge(*e).map(|e| e.dst))
            .chain(self.in_edges(id).iter().filter_map(|e| self.edge(*e).map(|e| e.src)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Rebuilds every index from the node and edge lists and reports any
    /// difference from the maintained ones.
    pub fn audit(&self) -> AuditReport {
        let mut issues = Vec::new();
        let live_nodes = self.nodes.iter().flatten().count();
        let live_edges = self.edges.iter().flatten().count();
        if live_nodes != self.node_count {
            issues.push(format!("node_count {} but {live_nodes} live nodes", self.node_count));
        }
        if live_edges != self.edge_count {
            issues.push(format!("edge_count {} but {live_edges} live edges", self.edge_count));
        }
        if self.out_adj.len() != self.nodes.len() || self.in_adj.len() != self.nodes.len() {
            issues.push("adjacency arrays not sized to node slots".to_string());
        }

        let mut want_out: Vec<Vec<EdgeId>> = vec![Vec::new(); self.nodes.len()];
        let mut want_in: Vec<Vec<EdgeId>> = vec![Vec::new(); self.nodes.len()];
        for (slot, edge) in self.edges.iter().enumerate() {
            let Some(edge) = edge else { continue };
            if edge.id.slot() != slot {
                issues.push(format!("edge in slot {slot} has id {}", edge.id));
            }
            for end in [edge.src, edge.dst] {
                if !self.contains_node(end) {
                    issues.push(format!("edge {} points at missing node {end}", edge.id));
                }
            }
            if let Some(v) = want_out.get_mut(edge.src.slot()) {
                v.push(edge.id);
            }
            if let Some(v) = want_in.get_mut(edge.dst.slot()) {
                v.push(edge.id);
            }
        }
        for slot in 0..self.nodes.len().min(self.out_adj.len()).min(self.in_adj.len()) {
            let mut have_out = self.out_adj[slot].clone();
            let mut have_in = self.in_adj[slot].clone();
            have_out.sort_unstable();
            have_in.sort_unstable();
            if have_out != want_out[slot] {
                issues.push(format!("out-list of n{slot} disagrees with edge list"));
            }
            if have_in != want_in[slot] {
                issues.push(format!("in-list of n{slot} disagrees with edge list"));
            }
        }

        let mut want_labels: BTreeMap<Label, BTreeSet<NodeId>> = BTreeMap::new();
        for (slot, node) in self.nodes.iter().enumerate() {
            let Some(node) = node else { continue };
            if node.id.slot() != slot {
                issues.push(format!("node in slot {slot} has id {}", node.id));
            }
            want_labels.entry(node.label).or_default().insert(node.id);
        }
        for label in Label::ALL {
            let have = self.label_index.get(&label).cloned().unwrap_or_default();
            let want = want_labels.remove(&label).unwrap_or_default();
            if have != want {
                issues.push(format!("label index for {label} disagrees with nodes"));
            }
        }

        for key in &self.indexed_keys {
            let mut want: HashMap<String, BTreeSet<NodeId>> = HashMap::new();
            for node in self.nodes.iter().flatten() {
                if let Some(v) = node.props.get(key) {
                    want.entry(v.clone()).or_default().insert(node.id);
                }
            }
            if self.prop_index.get(key) != Some(&want) {
                issues.push(format!("property index `{key}` disagrees with nodes"));
            }
        }
        AuditReport { discrepancies: issues }
    }

    /// Same nodes and edges (ids, labels, endpoints, properties).
    pub fn logically_eq(&self, other: &PropertyGraph) -> bool {
        self.nodes().eq(other.nodes()) && self.edges().eq(other.edges())
    }
}

pub fn props<I, K, V>(pairs: I) -> Props
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<String>,
{
    pairs
        .into_iter()
        .map(|(k, v)| (k.into(), v.into()))
        .collect()
}
