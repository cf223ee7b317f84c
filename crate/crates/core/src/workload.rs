//! Synthetic write/read workload for load-testing the graph store.
//!
//! Seven write patterns grow the graph (stars, unbalanced trees, random
//! nodes and links, index-heavy and oversized nodes, merges) while three
//! read patterns query it concurrently.
//!
//! The driver runs operations in lockstep rounds of `concurrency` streams.
//! Each operation draws from its own RNG stream and only looks at nodes
//! created in earlier rounds, and every node carries a `uid` derived from
//! the operation that created it. Thread scheduling therefore changes
//! node ids and latencies, never the logical graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Barrier, Mutex};
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{props, GraphError, GraphStore, Label, NodeId, PropertyGraph, Props};

pub const UID: &str = "uid";
pub const LONG_PATH_HOPS: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
    #[error("tree depth must be at least 1")]
    DepthZero,
    #[error("random linkage needs at least 2 nodes, graph has {0}")]
    InsufficientNodes(usize),
    #[error("graph is empty")]
    EmptyGraph,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    FatNodeAppend,
    NaryTree,
    MergeWrite,
    RandomLinkage,
    HubSpoke,
    RawWrite,
    IndexHeavy,
    AggregateRead,
    RandomAccessRead,
    LongPathRead,
}

impl Pattern {
    pub const ALL: [Pattern; 10] = [
        Pattern::FatNodeAppend,
        Pattern::NaryTree,
        Pattern::MergeWrite,
        Pattern::RandomLinkage,
        Pattern::HubSpoke,
        Pattern::RawWrite,
        Pattern::IndexHeavy,
        Pattern::AggregateRead,
        Pattern::RandomAccessRead,
        Pattern::LongPathRead,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::FatNodeAppend => "fat_node_append",
            Pattern::NaryTree => "nary_tree",
            Pattern::MergeWrite => "merge_write",
            Pattern::RandomLinkage => "random_linkage",
            Pattern::HubSpoke => "hub_spoke",
            Pattern::RawWrite => "raw_write",
            Pattern::IndexHeavy => "index_heavy",
            Pattern::AggregateRead => "aggregate_read",
            Pattern::RandomAccessRead => "random_access_read",
            Pattern::LongPathRead => "long_path_read",
        }
    }

    pub fn is_read(self) -> bool {
        matches!(
            self,
            Pattern::AggregateRead | Pattern::RandomAccessRead | Pattern::LongPathRead
        )
    }

    /// Share of `n` each pattern ran in the reference load test
    /// (10,030 operations at n = 1000).
    pub fn reference_weight(self) -> f64 {
        match self {
            Pattern::FatNodeAppend => 1.050,
            Pattern::NaryTree => 1.003,
            Pattern::MergeWrite => 0.985,
            Pattern::RandomLinkage => 1.010,
            Pattern::HubSpoke => 0.481,
            Pattern::RawWrite => 2.933,
            Pattern::IndexHeavy => 1.002,
            Pattern::AggregateRead => 0.552,
            Pattern::RandomAccessRead => 0.952,
            Pattern::LongPathRead => 0.062,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pattern {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| WorkloadError::InvalidSpec(format!("unknown pattern `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixEntry {
    pub pattern: Pattern,
    pub weight: f64,
}

pub fn reference_mix() -> Vec<MixEntry> {
    Pattern::ALL
        .into_iter()
        .map(|pattern| MixEntry {
            pattern,
            weight: pattern.reference_weight(),
        })
        .collect()
}

/// Per-operation sizes; inclusive ranges are drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SizeParams {
    pub hub_leaves: (usize, usize),
    pub tree_depth: (usize, usize),
    pub tree_branching: usize,
    pub raw_nodes: (usize, usize),
    pub linkage_edges: usize,
    pub index_nodes: usize,
    pub index_keys: usize,
    pub fat_nodes: usize,
    pub fat_len: usize,
    pub merge_calls: usize,
}

impl Default for SizeParams {
    fn default() -> Self {
        Self {
            hub_leaves: (10, 100),
            tree_depth: (3, 7),
            tree_branching: 2,
            raw_nodes: (10, 40),
            linkage_edges: 1,
            index_nodes: 15,
            index_keys: 10,
            fat_nodes: 1,
            fat_len: 4096,
            merge_calls: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub n: usize,
    pub concurrency: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "reference_mix")]
    pub mix: Vec<MixEntry>,
    #[serde(default)]
    pub sizes: SizeParams,
}

impl WorkloadSpec {
    pub fn reference(n: usize, concurrency: usize, seed: u64) -> Self {
        Self {
            n,
            concurrency,
            seed,
            mix: reference_mix(),
            sizes: SizeParams::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, WorkloadError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| WorkloadError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::InvalidSpec(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        if self.mix.is_empty() {
            return bad("mix is empty");
        }
        if self.mix.iter().any(|m| !(m.weight > 0.0 && m.weight.is_finite())) {
            return bad("weights must be positive");
        }
        let distinct: BTreeSet<Pattern> = self.mix.iter().map(|m| m.pattern).collect();
        if distinct.len() != self.mix.len() {
            return bad("a pattern appears twice in the mix");
        }
        let s = &self.sizes;
        let ordered = |(a, b): (usize, usize)| a <= b;
        if !ordered(s.hub_leaves) || !ordered(s.tree_depth) || !ordered(s.raw_nodes) {
            return bad("size range with min > max");
        }
        if s.tree_depth.0 == 0 || s.tree_branching == 0 {
            return bad("tree depth and branching must be at least 1");
        }
        Ok(())
    }

    /// Operations per pattern: `max(1, round(n * weight))`.
    pub fn quotas(&self) -> Vec<(Pattern, usize)> {
        self.mix
            .iter()
            .map(|m| (m.pattern, ((self.n as f64 * m.weight).round() as usize).max(1)))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// generators

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphStats {
    /// Nodes created, in creation order.
    pub nodes: Vec<NodeId>,
    pub edges: usize,
}

fn synthetic(g: &mut PropertyGraph, kind: &str, extra: Props) -> NodeId {
    let mut p = props([("kind", kind)]);
    p.extend(extra);
    g.create_node(Label::Synthetic, p)
}

/// One hub with `leaves` spokes.
pub fn gen_hub_spoke<R: Rng>(g: &mut PropertyGraph, rng: &mut R, leaves: usize) -> Result<SubgraphStats, WorkloadError> {
    let hub = synthetic(g, "hub", Props::new());
    let mut stats = SubgraphStats {
        nodes: vec![hub],
        edges: 0,
    };
    for _ in 0..leaves {
        let leaf = synthetic(g, "leaf", props([("weight", rng.random_range(0..1000u32).to_string())]));
        g.create_edge(hub, leaf, "spoke", Props::new())?;
        stats.nodes.push(leaf);
        stats.edges += 1;
    }
    Ok(stats)
}

/// A root and `depth` further levels; every node gets between 1 and
/// `branching` children, drawn level by level in creation order.
pub fn gen_nary_tree<R: Rng>(
    g: &mut PropertyGraph,
    rng: &mut R,
    branching: usize,
    depth: usize,
) -> Result<SubgraphStats, WorkloadError> {
    if depth == 0 {
        return Err(WorkloadError::DepthZero);
    }
    let branching = branching.max(1);
    let root = synthetic(g, "tree", props([("level", "0")]));
    let mut stats = SubgraphStats {
        nodes: vec![root],
        edges: 0,
    };
    let mut level = vec![root];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &parent in &level {
            for _ in 0..rng.random_range(1..=branching) {
                let child = synthetic(g, "tree", props([("level", d.to_string())]));
                g.create_edge(parent, child, "child", Props::new())?;
                stats.nodes.push(child);
                stats.edges += 1;
                next.push(child);
            }
        }
        level = next;
    }
    Ok(stats)
}

/// `nodes` random nodes joined by `edges` random links among themselves.
pub fn gen_raw_write<R: Rng>(
    g: &mut PropertyGraph,
    rng: &mut R,
    nodes: usize,
    edges: usize,
) -> Result<SubgraphStats, WorkloadError> {
    let created: Vec<NodeId> = (0..nodes)
        .map(|_| synthetic(g, "raw", props([("v", rng.random::<u32>().to_string())])))
        .collect();
    let mut stats = SubgraphStats {
        nodes: created.clone(),
        edges: 0,
    };
    if created.len() >= 2 {
        for _ in 0..edges {
            let (a, b) = distinct_pair(rng, created.len());
            g.create_edge(created[a], created[b], "raw", Props::new())?;
            stats.edges += 1;
        }
    }
    Ok(stats)
}

fn distinct_pair<R: Rng>(rng: &mut R, len: usize) -> (usize, usize) {
    let a = rng.random_range(0..len);
    let mut b = rng.random_range(0..len - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Links uniformly chosen pairs of distinct live nodes.
pub fn gen_random_linkage<R: Rng>(g: &mut PropertyGraph, rng: &mut R, edges: usize) -> Result<SubgraphStats, WorkloadError> {
    let candidates: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
    link_among(g, rng, edges, &candidates)
}

/// Links uniformly chosen pairs of distinct nodes from `candidates`.
pub fn link_among<R: Rng>(
    g: &mut PropertyGraph,
    rng: &mut R,
    edges: usize,
    candidates: &[NodeId],
) -> Result<SubgraphStats, WorkloadError> {
    if candidates.len() < 2 {
        return Err(WorkloadError::InsufficientNodes(candidates.len()));
    }
    let mut stats = SubgraphStats::default();
    for _ in 0..edges {
        let (a, b) = distinct_pair(rng, candidates.len());
        g.create_edge(candidates[a], candidates[b], "link", Props::new())?;
        stats.edges += 1;
    }
    Ok(stats)
}

pub fn index_key(i: usize) -> String {
    format!("idx_{i}")
}

/// `nodes` nodes carrying `keys` indexed properties each.
pub fn gen_index_heavy<R: Rng>(
    g: &mut PropertyGraph,
    rng: &mut R,
    nodes: usize,
    keys: usize,
) -> Result<SubgraphStats, WorkloadError> {
    for i in 0..keys {
        g.declare_index(index_key(i));
    }
    let created = (0..nodes)
        .map(|_| {
            let p: Props = (0..keys)
                .map(|i| (index_key(i), rng.random_range(0..10_000u32).to_string()))
                .collect();
            synthetic(g, "indexed", p)
        })
        .collect();
    Ok(SubgraphStats {
        nodes: created,
        edges: 0,
    })
}

/// `nodes` nodes whose `payload` property is `len` characters long.
pub fn gen_fat_node<R: Rng>(
    g: &mut PropertyGraph,
    rng: &mut R,
    nodes: usize,
    len: usize,
) -> Result<SubgraphStats, WorkloadError> {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    let created = (0..nodes)
        .map(|_| {
            let payload: String = (0..len).map(|_| LETTERS[rng.random_range(0..26)] as char).collect();
            synthetic(g, "fat", props([("payload", payload)]))
        })
        .collect();
    Ok(SubgraphStats {
        nodes: created,
        edges: 0,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeStats {
    pub created: Vec<NodeId>,
    pub matched: usize,
    /// One flag per call.
    pub created_flags: Vec<bool>,
}

/// `calls` merges on the `uid` property. Each call reuses a key from
/// `existing` with probability 1/2 (when it has any) and otherwise merges
/// `{fresh_prefix}{i}`.
pub fn gen_merge_write<R: Rng>(
    g: &mut PropertyGraph,
    rng: &mut R,
    calls: usize,
    existing: &[String],
    fresh_prefix: &str,
) -> Result<MergeStats, WorkloadError> {
    let mut stats = MergeStats::default();
    for i in 0..calls {
        let key = match existing.choose(rng) {
            Some(k) if rng.random_bool(0.5) => k.clone(),
            _ => format!("{fresh_prefix}{i}"),
        };
        let (id, created) = g.merge_node(Label::Synthetic, &props([(UID, key)]))?;
        if created {
            g.set_node_prop(id, "kind", "merged")?;
            stats.created.push(id);
        } else {
            stats.matched += 1;
        }
        stats.created_flags.push(created);
    }
    Ok(stats)
}

// ---------------------------------------------------------------------------
// reads

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadOutcome {
    Aggregate(BTreeMap<Label, usize>),
    Node(NodeId),
    Path(Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadSample {
    pub pattern: Pattern,
    pub elapsed: Duration,
    pub outcome: ReadOutcome,
}

fn random_node<R: Rng>(g: &PropertyGraph, rng: &mut R) -> Option<NodeId> {
    if g.is_empty() {
        return None;
    }
    let bound = g.node_id_bound();
    for _ in 0..64 {
        let id = NodeId(rng.random_range(0..bound));
        if g.contains_node(id) {
            return Some(id);
        }
    }
    let k = rng.random_range(0..g.node_count());
    g.nodes().nth(k).map(|n| n.id)
}

/// Runs one read query. Aggregate reads work on any graph; the other two
/// need at least one node.
pub fn run_read<R: Rng>(g: &PropertyGraph, rng: &mut R, pattern: Pattern) -> Result<ReadSample, WorkloadError> {
    let start = Instant::now();
    let outcome = match pattern {
        Pattern::AggregateRead => ReadOutcome::Aggregate(Label::ALL.into_iter().map(|l| (l, g.label_count(l))).collect()),
        Pattern::RandomAccessRead => {
            let id = random_node(g, rng).ok_or(WorkloadError::EmptyGraph)?;
            ReadOutcome::Node(g.node(id).map(|n| n.id).expect("live id"))
        }
        Pattern::LongPathRead => {
            let start = random_node(g, rng).ok_or(WorkloadError::EmptyGraph)?;
            let mut path = vec![start];
            let mut seen = BTreeSet::from([start]);
            while path.len() <= LONG_PATH_HOPS {
                let here = *path.last().expect("non-empty");
                let next: Vec<NodeId> = g.neighbors(here).into_iter().filter(|n| !seen.contains(n)).collect();
                let Some(&n) = next.choose(rng) else { break };
                seen.insert(n);
                path.push(n);
            }
            ReadOutcome::Path(path)
        }
        other => return Err(WorkloadError::InvalidSpec(format!("{other} is not a read pattern"))),
    };
    Ok(ReadSample {
        pattern,
        elapsed: start.elapsed(),
        outcome,
    })
}

// ---------------------------------------------------------------------------
// driver

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternStats {
    pub pattern: Pattern,
    pub runs: usize,
    pub failures: usize,
    pub avg_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub patterns: Vec<PatternStats>,
    pub total_runs: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub wall_ms: f64,
}

impl BenchmarkReport {
    pub fn stats(&self, pattern: Pattern) -> Option<&PatternStats> {
        self.patterns.iter().find(|p| p.pattern == pattern)
    }

    /// One row per pattern plus a `total` row: summed runs and the mean of
    /// each latency column.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let ms = |v: f64| format!("{v:.3}");
        w.write_record(["pattern", "runs", "avg_ms", "min_ms", "max_ms"]).expect("in memory");
        for p in &self.patterns {
            w.write_record([p.pattern.to_string(), p.runs.to_string(), ms(p.avg_ms), ms(p.min_ms), ms(p.max_ms)])
                .expect("in memory");
        }
        let k = self.patterns.len().max(1) as f64;
        let mean = |f: fn(&PatternStats) -> f64| self.patterns.iter().map(f).sum::<f64>() / k;
        w.write_record([
            "total".to_string(),
            self.total_runs.to_string(),
            ms(mean(|p| p.avg_ms)),
            ms(mean(|p| p.min_ms)),
            ms(mean(|p| p.max_ms)),
        ])
        .expect("in memory");
        String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
    }
}

/// Indexes every scratch graph needs: uid lookups plus the index-heavy keys.
pub fn scratch_graph(spec: &WorkloadSpec) -> PropertyGraph {
    let mut g = PropertyGraph::with_indexes([UID]);
    for i in 0..spec.sizes.index_keys {
        g.declare_index(index_key(i));
    }
    g
}

pub fn run_benchmark(spec: &WorkloadSpec) -> Result<(BenchmarkReport, PropertyGraph), WorkloadError> {
    let store = GraphStore::new(scratch_graph(spec));
    let report = run_benchmark_on(&store, spec)?;
    Ok((report, store.snapshot()))
}

struct OpResult {
    pattern: Pattern,
    elapsed: Duration,
    ok: bool,
    uids: Vec<String>,
    merge_uids: Vec<String>,
}

#[derive(Default)]
struct Pools {
    nodes: Vec<String>,
    merged: Vec<String>,
}

/// Runs `spec` against `store` with `spec.concurrency` worker threads.
pub fn run_benchmark_on(store: &GraphStore, spec: &WorkloadSpec) -> Result<BenchmarkReport, WorkloadError> {
    spec.validate()?;
    let mut schedule: Vec<Pattern> = spec
        .quotas()
        .into_iter()
        .flat_map(|(p, k)| std::iter::repeat_n(p, k))
        .collect();
    schedule.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    let c = spec.concurrency;
    let rounds = schedule.len().div_ceil(c);
    let barrier = Barrier::new(c);
    let slots: Vec<Mutex<Option<OpResult>>> = (0..c).map(|_| Mutex::new(None)).collect();
    let pools = std::sync::RwLock::new(Pools::default());
    let results = Mutex::new(Vec::with_capacity(schedule.len()));

    let wall = Instant::now();
    std::thread::scope(|scope| {
        for w in 0..c {
            let (schedule, barrier, slots, pools, results) = (&schedule, &barrier, &slots, &pools, &results);
            scope.spawn(move || {
                for round in 0..rounds {
                    let op = round * c + w;
                    if let Some(&pattern) = schedule.get(op) {
                        let outcome = {
                            let pools = pools.read().expect("pool lock");
                            execute(store, spec, op, pattern, &pools)
                        };
                        *slots[w].lock().expect("slot lock") = Some(outcome);
                    }
                    if barrier.wait().is_leader() {
                        let mut pools = pools.write().expect("pool lock");
                        let mut results = results.lock().expect("results lock");
                        for slot in slots {
                            if let Some(r) = slot.lock().expect("slot lock").take() {
                                pools.nodes.extend(r.uids.iter().cloned());
                                pools.merged.extend(r.merge_uids.iter().cloned());
                                results.push(r);
                            }
                        }
                    }
                    barrier.wait();
                }
            });
        }
    });
    let wall_ms = wall.elapsed().as_secs_f64() * 1e3;

    let results = results.into_inner().expect("results lock");
    let mut patterns = Vec::new();
    for entry in &spec.mix {
        let mine: Vec<&OpResult> = results.iter().filter(|r| r.pattern == entry.pattern).collect();
        let ms: Vec<f64> = mine.iter().map(|r| r.elapsed.as_secs_f64() * 1e3).collect();
        let (min_ms, max_ms) = ms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        let avg_ms = if ms.is_empty() { 0.0 } else { ms.iter().sum::<f64>() / ms.len() as f64 };
        patterns.push(PatternStats {
            pattern: entry.pattern,
            runs: mine.len(),
            failures: mine.iter().filter(|r| !r.ok).count(),
            // averaging can round a hair outside the observed range
            avg_ms: if ms.is_empty() { 0.0 } else { avg_ms.clamp(min_ms, max_ms) },
            min_ms: if ms.is_empty() { 0.0 } else { min_ms },
            max_ms: if ms.is_empty() { 0.0 } else { max_ms },
        });
    }
    let (node_count, edge_count) = store.read(|g| (g.node_count(), g.edge_count()));
    Ok(BenchmarkReport {
        patterns,
        total_runs: results.len(),
        node_count,
        edge_count,
        wall_ms,
    })
}

fn op_rng(seed: u64, op: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(op as u64 + 1);
    r
}

fn execute(store: &GraphStore, spec: &WorkloadSpec, op: usize, pattern: Pattern, pools: &Pools) -> OpResult {
    let mut rng = op_rng(spec.seed, op);
    let s = &spec.sizes;
    let start = Instant::now();
    let mut uids = Vec::new();
    let mut merge_uids = Vec::new();
    let ok = if pattern.is_read() {
        store.read(|g| run_read(g, &mut rng, pattern)).is_ok()
    } else {
        // size draws happen before taking the lock
        let hub = rng.random_range(s.hub_leaves.0..=s.hub_leaves.1);
        let depth = rng.random_range(s.tree_depth.0..=s.tree_depth.1);
        let raw = rng.random_range(s.raw_nodes.0..=s.raw_nodes.1);
        let endpoints: Vec<String> = if pattern == Pattern::RandomLinkage && pools.nodes.len() >= 2 {
            (0..2 * s.linkage_edges)
                .map(|_| pools.nodes[rng.random_range(0..pools.nodes.len())].clone())
                .collect()
        } else {
            Vec::new()
        };
        let result = store.write(|g| -> Result<Vec<NodeId>, WorkloadError> {
            match pattern {
                Pattern::HubSpoke => Ok(gen_hub_spoke(g, &mut rng, hub)?.nodes),
                Pattern::NaryTree => Ok(gen_nary_tree(g, &mut rng, s.tree_branching, depth)?.nodes),
                Pattern::RawWrite => Ok(gen_raw_write(g, &mut rng, raw, raw / 2)?.nodes),
                Pattern::IndexHeavy => Ok(gen_index_heavy(g, &mut rng, s.index_nodes, s.index_keys)?.nodes),
                Pattern::FatNodeAppend => Ok(gen_fat_node(g, &mut rng, s.fat_nodes, s.fat_len)?.nodes),
                Pattern::RandomLinkage => {
                    if endpoints.len() < 2 {
                        return Err(WorkloadError::InsufficientNodes(pools.nodes.len()));
                    }
                    for pair in endpoints.chunks(2) {
                        let a = g.find_nodes(Label::Synthetic, UID, &pair[0]);
                        let b = g.find_nodes(Label::Synthetic, UID, &pair[1]);
                        if let (Some(a), Some(b)) = (a.first(), b.first()) {
                            g.create_edge(*a, *b, "link", Props::new())?;
                        }
                    }
                    Ok(Vec::new())
                }
                Pattern::MergeWrite => {
                    let m = gen_merge_write(g, &mut rng, s.merge_calls, &pools.merged, &format!("m{op}."))?;
                    for id in &m.created {
                        merge_uids.push(g.node(*id).expect("just created").props[UID].clone());
                    }
                    Ok(Vec::new())
                }
                _ => unreachable!("reads handled above"),
            }
            .inspect(|created| {
                for (k, id) in created.iter().enumerate() {
                    let uid = format!("w{op}.{k}");
                    g.set_node_prop(*id, UID, uid.clone()).expect("just created");
                    uids.push(uid);
                }
            })
        });
        result.is_ok()
    };
    uids.extend(merge_uids.iter().cloned());
    OpResult {
        pattern,
        elapsed: start.elapsed(),
        ok,
        uids,
        merge_uids,
    }
}

/// Graph content with node ids replaced by `uid` values, so graphs built
/// under different schedules compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalGraph {
    pub nodes: BTreeMap<String, (Label, Props)>,
    pub edges: Vec<(String, String, String, Props)>,
}

pub fn logical_graph(g: &PropertyGraph) -> LogicalGraph {
    let name = |id: NodeId| {
        g.node(id)
            .and_then(|n| n.props.get(UID).cloned())
            .unwrap_or_else(|| format!("#{}", id.0))
    };
    let nodes = g.nodes().map(|n| (name(n.id), (n.label, n.props.clone()))).collect();
    let mut edges: Vec<_> = g
        .edges()
        .map(|e| (name(e.src), name(e.dst), e.rel_type.clone(), e.props.clone()))
        .collect();
    edges.sort();
    LogicalGraph { nodes, edges }
}
