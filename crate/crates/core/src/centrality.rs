//! Node centrality and the aggregate relevance score.
//!
//! Degree keeps edge direction (in + out, a self-loop counts twice). The
//! path-based metrics and eigenvector centrality run on the undirected
//! simple view of the graph: parallel edges collapse and self-loops are
//! dropped.
//!
//! Relevance is the sum of min-max normalized degree, betweenness and
//! eigenvector scores. Closeness is reported but does not contribute.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{Label, NodeId, PropertyGraph};

pub const EIGEN_TOLERANCE: f64 = 1e-8;
pub const EIGEN_MAX_ITERATIONS: usize = 1000;

/// Sources handled per unit of parallel work. Fixed, so partial sums are
/// always added in the same order whatever the thread count.
const SOURCE_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CentralityError {
    #[error("graph has no edges")]
    NoEdges,
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
}

/// Undirected simple graph over the live nodes, in id order.
#[derive(Debug, Clone)]
pub struct UndirectedView {
    pub ids: Vec<NodeId>,
    pub adj: Vec<Vec<usize>>,
}

impl UndirectedView {
    pub fn new(g: &PropertyGraph) -> Self {
        let ids: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
        let pos: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for e in g.edges() {
            if e.src == e.dst {
                continue;
            }
            let (a, b) = (pos[&e.src], pos[&e.dst]);
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Self { ids, adj }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn to_map(&self, values: Vec<f64>) -> BTreeMap<NodeId, f64> {
        self.ids.iter().copied().zip(values).collect()
    }

    /// BFS hop distances from `s`; unreachable nodes are `usize::MAX`.
    pub fn distances(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components as ascending index lists, ordered by smallest
    /// member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// In-degree plus out-degree.
pub fn degree_centrality(g: &PropertyGraph) -> BTreeMap<NodeId, usize> {
    g.nodes().map(|n| (n.id, g.degree(n.id))).collect()
}

pub fn betweenness_centrality(g: &PropertyGraph) -> BTreeMap<NodeId, f64> {
    let view = UndirectedView::new(g);
    let scores = brandes(&view);
    view.to_map(scores)
}

/// Brandes accumulation over all sources; each unordered pair counted once.
pub fn brandes(view: &UndirectedView) -> Vec<f64> {
    let n = view.len();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut work = BrandesWork::new(n);
            for &s in chunk {
                work.accumulate(view, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    for t in &mut total {
        *t /= 2.0;
    }
    total
}

struct BrandesWork {
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    preds: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl BrandesWork {
    fn new(n: usize) -> Self {
        Self {
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
        }
    }

    fn accumulate(&mut self, view: &UndirectedView, s: usize, acc: &mut [f64]) {
        self.sigma.fill(0.0);
        self.dist.fill(-1);
        self.delta.fill(0.0);
        for p in &mut self.preds {
            p.clear();
        }
        self.order.clear();

        self.sigma[s] = 1.0;
        self.dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            self.order.push(v);
            for &w in &view.adj[v] {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
        while let Some(w) = self.order.pop() {
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &v in &self.preds[w] {
                self.delta[v] += self.sigma[v] * coeff;
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Closeness scaled by the reachable share of the graph, so nodes in small
/// components do not look central.
pub fn closeness_centrality(g: &PropertyGraph) -> BTreeMap<NodeId, f64> {
    let view = UndirectedView::new(g);
    let n = view.len();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|s| {
            let dist = view.distances(s);
            let reach: Vec<usize> = dist.into_iter().filter(|d| *d != usize::MAX).collect();
            let r = reach.len();
            let total: usize = reach.iter().sum();
            if r <= 1 || n <= 1 || total == 0 {
                return 0.0;
            }
            let r1 = (r - 1) as f64;
            (r1 / (n - 1) as f64) * (r1 / total as f64)
        })
        .collect();
    view.to_map(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorResult {
    pub scores: BTreeMap<NodeId, f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Rayleigh-quotient estimate of the dominant adjacency eigenvalue.
    pub eigenvalue: f64,
}

/// Power iteration per connected component; the component with the
/// largest eigenvalue keeps its unit-norm vector, all other nodes score 0.
///
/// Each step multiplies by `A + I` instead of `A`: same eigenvectors, but
/// the iteration no longer oscillates on bipartite graphs such as stars.
pub fn eigenvector_centrality(g: &PropertyGraph) -> Result<EigenvectorResult, CentralityError> {
    let view = UndirectedView::new(g);
    if view.edge_count() == 0 {
        return Err(CentralityError::NoEdges);
    }
    struct Dominant {
        lambda: f64,
        comp: Vec<usize>,
        vector: Vec<f64>,
        converged: bool,
        iterations: usize,
    }
    let mut best: Option<Dominant> = None;
    for comp in view.components().into_iter().filter(|c| c.len() > 1) {
        let (vector, converged, iterations) = power_iterate(&view, &comp);
        let lambda = rayleigh(&view, &comp, &vector);
        if best.as_ref().is_none_or(|b| lambda > b.lambda + 1e-9) {
            best = Some(Dominant {
                lambda,
                comp,
                vector,
                converged,
                iterations,
            });
        }
    }
    let best = best.expect("an edge implies a component");
    let mut values = vec![0.0; view.len()];
    for (&v, x) in best.comp.iter().zip(best.vector) {
        values[v] = x;
    }
    Ok(EigenvectorResult {
        scores: view.to_map(values),
        converged: best.converged,
        iterations: best.iterations,
        eigenvalue: best.lambda,
    })
}

fn power_iterate(view: &UndirectedView, comp: &[usize]) -> (Vec<f64>, bool, usize) {
    let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let m = comp.len();
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut next = vec![0.0; m];
    for iteration in 1..=EIGEN_MAX_ITERATIONS {
        for (i, &v) in comp.iter().enumerate() {
            next[i] = x[i] + view.adj[v].iter().map(|w| x[local[w]]).sum::<f64>();
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut change: f64 = 0.0;
        for (xi, ni) in x.iter_mut().zip(&next) {
            let v = ni / norm;
            change = change.max((v - *xi).abs());
            *xi = v;
        }
        if change < EIGEN_TOLERANCE {
            return (x, true, iteration);
        }
    }
    (x, false, EIGEN_MAX_ITERATIONS)
}

fn rayleigh(view: &UndirectedView, comp: &[usize], x: &[f64]) -> f64 {
    let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    comp.iter()
        .enumerate()
        .map(|(i, &v)| x[i] * view.adj[v].iter().map(|w| x[local[w]]).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceMode {
    /// Each metric rescaled to `[0, 1]` before summing.
    #[default]
    MinMax,
    RawSum,
}

/// Rescales to `[0, 1]`; a constant metric maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || hi - lo <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

pub fn relevance_scores(g: &PropertyGraph) -> BTreeMap<NodeId, f64> {
    relevance_with(g, RelevanceMode::MinMax)
}

pub fn relevance_with(g: &PropertyGraph, mode: RelevanceMode) -> BTreeMap<NodeId, f64> {
    let degree: Vec<f64> = degree_centrality(g).into_values().map(|d| d as f64).collect();
    let betweenness: Vec<f64> = betweenness_centrality(g).into_values().collect();
    let eigen: Vec<f64> = match eigenvector_centrality(g) {
        Ok(r) => r.scores.into_values().collect(),
        Err(_) => vec![0.0; degree.len()],
    };
    let ids: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
    combine(&ids, &degree, &betweenness, &eigen, mode)
}

fn combine(
    ids: &[NodeId],
    degree: &[f64],
    betweenness: &[f64],
    eigen: &[f64],
    mode: RelevanceMode,
) -> BTreeMap<NodeId, f64> {
    let (d, b, e) = match mode {
        RelevanceMode::MinMax => (
            min_max_normalize(degree),
            min_max_normalize(betweenness),
            min_max_normalize(eigen),
        ),
        RelevanceMode::RawSum => (degree.to_vec(), betweenness.to_vec(), eigen.to_vec()),
    };
    ids.iter()
        .enumerate()
        .map(|(i, id)| (*id, d[i] + b[i] + e[i]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Degree,
    Betweenness,
    Closeness,
    Eigenvector,
    Relevance,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Degree,
        Metric::Betweenness,
        Metric::Closeness,
        Metric::Eigenvector,
        Metric::Relevance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::Betweenness => "betweenness",
            Metric::Closeness => "closeness",
            Metric::Eigenvector => "eigenvector",
            Metric::Relevance => "relevance",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = CentralityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CentralityError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub node_id: NodeId,
    pub label: Label,
    pub degree: usize,
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
    pub relevance: f64,
}

impl CentralityRow {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Degree => self.degree as f64,
            Metric::Betweenness => self.betweenness,
            Metric::Closeness => self.closeness,
            Metric::Eigenvector => self.eigenvector,
            Metric::Relevance => self.relevance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityTable {
    pub rows: Vec<CentralityRow>,
    pub eigenvector_converged: bool,
}

impl CentralityTable {
    pub fn compute(g: &PropertyGraph) -> Self {
        Self::compute_with(g, RelevanceMode::MinMax)
    }

    pub fn compute_with(g: &PropertyGraph, mode: RelevanceMode) -> Self {
        let ids: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
        let degree = degree_centrality(g);
        let betweenness = betweenness_centrality(g);
        let closeness = closeness_centrality(g);
        let (eigen, converged) = match eigenvector_centrality(g) {
            Ok(r) => (r.scores, r.converged),
            Err(_) => (ids.iter().map(|id| (*id, 0.0)).collect(), true),
        };
        let deg_f: Vec<f64> = degree.values().map(|d| *d as f64).collect();
        let bet: Vec<f64> = betweenness.values().copied().collect();
        let eig: Vec<f64> = eigen.values().copied().collect();
        let relevance = combine(&ids, &deg_f, &bet, &eig, mode);
        let rows = g
            .nodes()
            .map(|n| CentralityRow {
                node_id: n.id,
                label: n.label,
                degree: degree[&n.id],
                betweenness: betweenness[&n.id],
                closeness: closeness[&n.id],
                eigenvector: eigen[&n.id],
                relevance: relevance[&n.id],
            })
            .collect();
        Self {
            rows,
            eigenvector_converged: converged,
        }
    }

    /// Rows by descending `metric`, ties by ascending node id.
    pub fn ranked(&self, metric: Metric) -> Vec<&CentralityRow> {
        let mut rows: Vec<&CentralityRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            b.value(metric)
                .total_cmp(&a.value(metric))
                .then(a.node_id.cmp(&b.node_id))
        });
        rows
    }

    pub fn write_csv<'a, W, I>(rows: I, out: W) -> csv::Result<()>
    where
        W: std::io::Write,
        I: IntoIterator<Item = &'a CentralityRow>,
    {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "node_id",
            "label",
            "degree",
            "betweenness",
            "closeness",
            "eigenvector",
            "relevance",
        ])?;
        for r in rows {
            w.write_record([
                r.node_id.0.to_string(),
                r.label.to_string(),
                r.degree.to_string(),
                r.betweenness.to_string(),
                r.closeness.to_string(),
                r.eigenvector.to_string(),
                r.relevance.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        Self::write_csv(&self.rows, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Label, Props};

    fn graph(n: usize, edges: &[(usize, usize)]) -> PropertyGraph {
        let mut g = PropertyGraph::new();
        let ids: Vec<_> = (0..n).map(|_| g.create_node(Label::Synthetic, Props::new())).collect();
        for &(a, b) in edges {
            g.create_edge(ids[a], ids[b], "r", Props::new()).unwrap();
        }
        g
    }

    fn star(leaves: usize) -> PropertyGraph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        graph(leaves + 1, &edges)
    }

    fn k(n: usize) -> PropertyGraph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        graph(n, &edges)
    }

    #[test]
    fn degree_basics() {
        let g = graph(1, &[]);
        assert_eq!(degree_centrality(&g)[&NodeId(0)], 0);
        let s = degree_centrality(&star(6));
        assert_eq!(s[&NodeId(0)], 6);
        assert!((1..=6).all(|i| s[&NodeId(i)] == 1));
        let looped = graph(1, &[(0, 0)]);
        assert_eq!(degree_centrality(&looped)[&NodeId(0)], 2);
    }

    #[test]
    fn betweenness_basics() {
        assert!(betweenness_centrality(&k(4)).values().all(|b| *b == 0.0));
        let p3 = betweenness_centrality(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(p3[&NodeId(1)], 1.0);
        assert_eq!(p3[&NodeId(0)], 0.0);
        // parallel edges and reversed duplicates collapse
        let multi = betweenness_centrality(&graph(3, &[(0, 1), (1, 0), (1, 2), (1, 2)]));
        assert_eq!(multi[&NodeId(1)], 1.0);
        // star of k leaves: every leaf pair routes through the hub
        assert_eq!(betweenness_centrality(&star(5))[&NodeId(0)], 10.0);
    }

    #[test]
    fn closeness_basics() {
        assert_eq!(closeness_centrality(&graph(1, &[]))[&NodeId(0)], 0.0);
        assert!(closeness_centrality(&k(3)).values().all(|c| *c == 1.0));
        let p3 = closeness_centrality(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(p3[&NodeId(1)], 1.0);
        assert!((p3[&NodeId(0)] - 2.0 / 3.0).abs() < 1e-15);
        // two nodes of a 4-node graph joined by one edge: r = 2, n = 4
        let split = closeness_centrality(&graph(4, &[(0, 1)]));
        assert!((split[&NodeId(0)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(split[&NodeId(3)], 0.0);
    }

    #[test]
    fn eigenvector_basics() {
        let r = eigenvector_centrality(&k(4)).unwrap();
        assert!(r.converged);
        assert!(r.scores.values().all(|x| (x - 0.5).abs() < 1e-9));
        assert!((r.eigenvalue - 3.0).abs() < 1e-9);

        let s = eigenvector_centrality(&star(4)).unwrap();
        assert!(s.converged);
        let hub = s.scores[&NodeId(0)];
        let leaves: Vec<f64> = (1..=4).map(|i| s.scores[&NodeId(i)]).collect();
        assert!(leaves.iter().all(|l| hub > *l && (l - leaves[0]).abs() < 1e-12));
        // exact: hub 1/sqrt(2), leaves 1/(2 sqrt(2))
        assert!((hub - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);

        assert_eq!(eigenvector_centrality(&graph(3, &[])), Err(CentralityError::NoEdges));
        assert_eq!(eigenvector_centrality(&graph(2, &[(0, 0)])), Err(CentralityError::NoEdges));
    }

    #[test]
    fn eigenvector_picks_dominant_component() {
        // triangle (lambda 2) plus a separate edge (lambda 1)
        let g = graph(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
        let r = eigenvector_centrality(&g).unwrap();
        assert!((r.eigenvalue - 2.0).abs() < 1e-9);
        assert_eq!(r.scores[&NodeId(3)], 0.0);
        let norm: f64 = r.scores.values().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relevance_basics() {
        let pair = relevance_scores(&graph(2, &[(0, 1)]));
        assert_eq!(pair[&NodeId(0)], pair[&NodeId(1)]);
        let s = relevance_scores(&star(10));
        let hub = s[&NodeId(0)];
        assert_eq!(hub, 3.0);
        assert!((1..=10).all(|i| s[&NodeId(i)] < hub));
        // no edges: eigenvector contributes zeros, nothing crashes
        assert!(relevance_scores(&graph(3, &[])).values().all(|v| *v == 0.0));
    }

    #[test]
    fn raw_sum_mode() {
        let s = relevance_with(&star(3), RelevanceMode::RawSum);
        let e = eigenvector_centrality(&star(3)).unwrap().scores[&NodeId(0)];
        assert!((s[&NodeId(0)] - (3.0 + 3.0 + e)).abs() < 1e-12);
    }

    #[test]
    fn table_csv_and_ranking() {
        let g = star(3);
        let t = CentralityTable::compute(&g);
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("node_id,label,degree,betweenness,closeness,eigenvector,relevance"));
        assert!(lines.next().unwrap().starts_with("0,synthetic,3,3,1,"));
        assert_eq!(t.ranked(Metric::Relevance)[0].node_id, NodeId(0));
        assert_eq!("closeness".parse::<Metric>(), Ok(Metric::Closeness));
        assert!("pagerank".parse::<Metric>().is_err());
    }

    #[test]
    fn min_max_constant_is_zero() {
        assert_eq!(min_max_normalize(&[2.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(min_max_normalize(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
        assert!(min_max_normalize(&[]).is_empty());
    }
}
