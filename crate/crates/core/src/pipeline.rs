//! Loader JSON to graph in one call: extract mentions, disambiguate them
//! and build the property graph.

use serde::Serialize;

use crate::disambiguation::{disambiguate_with, DisambiguationError, DisambiguationReport, Execution, FilterConfig};
use crate::graph::{build_into, BuildSummary, GraphError, PropertyGraph, DEFAULT_INDEXED_KEYS};
use crate::ingest::{extract_entities, DocumentSet, IngestError, TopicKeys};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Disambiguation(#[from] DisambiguationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PipelineCounts {
    pub databooks: usize,
    pub documents: usize,
    pub mentions: usize,
    pub distinct_raw: usize,
    pub distinct_canonical: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: DisambiguationReport,
    pub graph: PropertyGraph,
    pub build: BuildSummary,
    pub counts: PipelineCounts,
}

/// Disambiguation only. A set without topic mentions yields an empty
/// report instead of an error.
pub fn disambiguate_set(
    ds: &DocumentSet,
    cfg: &FilterConfig,
    keys: &TopicKeys,
) -> Result<(DisambiguationReport, usize), PipelineError> {
    let mentions = extract_entities(ds, keys);
    if mentions.is_empty() {
        return Ok((DisambiguationReport::default(), 0));
    }
    let report = disambiguate_with(&mentions, cfg, Execution::Parallel)?;
    Ok((report, mentions.len()))
}

pub fn run_pipeline(ds: &DocumentSet, cfg: &FilterConfig, keys: &TopicKeys) -> Result<PipelineOutput, PipelineError> {
    let (report, mentions) = disambiguate_set(ds, cfg, keys)?;
    let mut graph = PropertyGraph::with_indexes(DEFAULT_INDEXED_KEYS.iter().copied());
    let build = build_into(&mut graph, ds, &report)?;
    let counts = PipelineCounts {
        databooks: ds.databooks().len(),
        documents: ds.documents().len(),
        mentions,
        distinct_raw: report.distinct_raw(),
        distinct_canonical: report.distinct_canonical(),
    };
    Ok(PipelineOutput {
        report,
        graph,
        build,
        counts,
    })
}
