use serde::{Deserialize, Serialize};

use super::{Edge, GraphError, Label, Node, PropertyGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropTarget {
    Src,
    Edge,
    Dst,
    /// Satisfied when any of source, edge or destination carries the pair.
    #[default]
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropFilter {
    pub key: String,
    pub value: String,
    #[serde(default)]
    pub on: PropTarget,
}

/// A node-edge-node pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraversalQuery {
    #[serde(default)]
    pub src_label: Option<Label>,
    #[serde(default)]
    pub rel_type: Option<String>,
    #[serde(default)]
    pub dst_label: Option<Label>,
    #[serde(default)]
    pub prop_filters: Vec<PropFilter>,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_limit() -> usize {
    100
}

impl Default for TraversalQuery {
    fn default() -> Self {
        Self {
            src_label: None,
            rel_type: None,
            dst_label: None,
            prop_filters: Vec::new(),
            limit: default_limit(),
        }
    }
}

impl TraversalQuery {
    fn accepts(&self, src: &Node, edge: &Edge, dst: &Node) -> bool {
        if self.src_label.is_some_and(|l| l != src.label)
            || self.dst_label.is_some_and(|l| l != dst.label)
            || self.rel_type.as_ref().is_some_and(|r| *r != edge.rel_type)
        {
            return false;
        }
        self.prop_filters.iter().all(|f| {
            let has = |p: &super::Props| p.get(&f.key) == Some(&f.value);
            match f.on {
                PropTarget::Src => has(&src.props),
                PropTarget::Edge => has(&edge.props),
                PropTarget::Dst => has(&dst.props),
                PropTarget::Any => has(&src.props) || has(&edge.props) || has(&dst.props),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub src: Node,
    pub edge: Edge,
    pub dst: Node,
}

/// Matching `(src, edge, dst)` triples in edge-id order, at most `limit`.
pub fn traverse(g: &PropertyGraph, q: &TraversalQuery) -> Result<Vec<Triple>, GraphError> {
    if q.limit == 0 {
        return Err(GraphError::InvalidQuery("limit must be at least 1".into()));
    }
    let mut out = Vec::new();
    for edge in g.edges() {
        let (Some(src), Some(dst)) = (g.node(edge.src), g.node(edge.dst)) else {
            continue;
        };
        if q.accepts(src, edge, dst) {
            out.push(Triple {
                src: src.clone(),
                edge: edge.clone(),
                dst: dst.clone(),
            });
            if out.len() == q.limit {
                break;
            }
        }
    }
    Ok(out)
}
