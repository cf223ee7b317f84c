//! Line-oriented persistence.
//!
//! ```text
//! GRAPHLED1
//! {"n":0,"l":"document","p":{"doc_id":"D1"}}
//! {"e":0,"s":0,"d":1,"t":"OS_LOTE","p":{}}
//! ```
//!
//! All node lines precede all edge lines and every line, the last one
//! included, ends with `\n`; a file cut short mid-line is rejected.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build::DEFAULT_INDEXED_KEYS, Edge, EdgeId, GraphError, Label, Node, NodeId, PropertyGraph, Props};

pub const MAGIC: &str = "GRAPHLED1";

#[derive(Serialize)]
struct NodeOut<'a> {
    n: u64,
    l: Label,
    p: &'a Props,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    e: u64,
    s: u64,
    d: u64,
    t: &'a str,
    p: &'a Props,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeIn {
    n: u64,
    l: Label,
    p: Props,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeIn {
    e: u64,
    s: u64,
    d: u64,
    t: String,
    p: Props,
}

/// Writes `g` and returns the number of bytes written.
pub fn write_graph<W: Write>(g: &PropertyGraph, out: W) -> Result<u64, GraphError> {
    let mut out = CountingWriter { inner: BufWriter::new(out), count: 0 };
    writeln!(out, "{MAGIC}")?;
    for node in g.nodes() {
        let line = NodeOut {
            n: node.id.0,
            l: node.label,
            p: &node.props,
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    for edge in g.edges() {
        let line = EdgeOut {
            e: edge.id.0,
            s: edge.src.0,
            d: edge.dst.0,
            t: &edge.rel_type,
            p: &edge.props,
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(out.count)
}

struct CountingWriter<W: Write> {
    inner: W,
    count: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.count += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

pub fn save(g: &PropertyGraph, path: &Path) -> Result<u64, GraphError> {
    let file = std::fs::File::create(path)?;
    write_graph(g, file)
}

/// Loads with the default indexed keys.
pub fn load(path: &Path) -> Result<PropertyGraph, GraphError> {
    load_with_indexes(path, DEFAULT_INDEXED_KEYS.iter().copied())
}

pub fn load_with_indexes<I, S>(path: &Path, indexed: I) -> Result<PropertyGraph, GraphError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let file = std::fs::File::open(path)?;
    read_graph(file, PropertyGraph::with_indexes(indexed))
}

fn format_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Format {
        line,
        message: message.into(),
    }
}

/// Reads a persisted graph into `g`, which must be empty.
pub fn read_graph<R: Read>(mut input: R, mut g: PropertyGraph) -> Result<PropertyGraph, GraphError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|_| format_err(0, "not UTF-8"))?;
    if !text.ends_with('\n') {
        return Err(format_err(text.lines().count(), "truncated: missing final newline"));
    }
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(format_err(1, format!("expected header `{MAGIC}`"))),
    }
    let mut in_edges = false;
    for (no, line) in lines {
        if line.starts_with("{\"n\"") {
            if in_edges {
                return Err(format_err(no, "node line after edge lines"));
            }
            let nl: NodeIn = serde_json::from_str(line).map_err(|e| format_err(no, e.to_string()))?;
            let id = NodeId(nl.n);
            if g.contains_node(id) {
                return Err(format_err(no, format!("duplicate node id {}", nl.n)));
            }
            g.insert_node(Node {
                id,
                label: nl.l,
                props: nl.p,
            });
        } else if line.starts_with("{\"e\"") {
            in_edges = true;
            let el: EdgeIn = serde_json::from_str(line).map_err(|e| format_err(no, e.to_string()))?;
            let (src, dst) = (NodeId(el.s), NodeId(el.d));
            if !g.contains_node(src) || !g.contains_node(dst) {
                return Err(format_err(no, format!("edge {} has a missing endpoint", el.e)));
            }
            let id = EdgeId(el.e);
            if g.edge(id).is_some() {
                return Err(format_err(no, format!("duplicate edge id {}", el.e)));
            }
            g.insert_edge(Edge {
                id,
                src,
                dst,
                rel_type: el.t,
                props: el.p,
            });
        } else {
            return Err(format_err(no, "expected a node or edge record"));
        }
    }
    Ok(g)
}
