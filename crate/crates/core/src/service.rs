//! JSON-over-HTTP API.
//!
//! The server keeps one active corpus (documents plus the graph built
//! from them) behind an `Arc` swap: readers clone the current snapshot
//! and never block on, or observe, a mutation in progress. Ingest and
//! delete rebuild the graph off to the side and publish it in one step.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use parking_lot::{Mutex, RwLock};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::centrality::{CentralityError, CentralityRow, CentralityTable, Metric};
use crate::disambiguation::{DisambiguationError, FilterConfig};
use crate::graph::{self, traverse, GraphError, Label, PropertyGraph, TraversalQuery, Triple};
use crate::ingest::{parse_loader_json, DocumentSet, IngestError, TopicKeys};
use crate::inspection::{
    check_conformance, check_databook, trace, CompletenessReport, ConformanceResult, ConformanceRule, InspectionError,
    TraceReport, DEFAULT_TRACE_DEPTH,
};
use crate::pipeline::{run_pipeline, PipelineError};
use crate::workload::{run_benchmark, BenchmarkReport, WorkloadError, WorkloadSpec};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8098";
pub const LISTEN_ENV: &str = "GRAPHLED_LISTEN";
const BODY_LIMIT: usize = 64 * 1024 * 1024;

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{status} {code}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl ToString) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.to_string(),
        }
    }

    fn bad_request(code: &str, message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Syntax(_) => Self::bad_request("SyntaxError", e),
            IngestError::Schema { .. } => Self::bad_request("SchemaError", e),
            IngestError::Reference { .. } => Self::bad_request("ReferenceError", e),
            IngestError::Io { .. } => Self::internal(e),
        }
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownNode(_) | GraphError::UnknownEdge(_) => Self::new(StatusCode::NOT_FOUND, "UnknownNode", e),
            GraphError::AmbiguousMerge { .. } => Self::new(StatusCode::CONFLICT, "AmbiguousMerge", e),
            GraphError::DuplicateDocument(_) => Self::new(StatusCode::CONFLICT, "DuplicateDocument", e),
            GraphError::DuplicateDatabook(_) => Self::new(StatusCode::CONFLICT, "DuplicateDatabook", e),
            GraphError::InvalidQuery(_) | GraphError::EmptyMergePattern => Self::bad_request("InvalidQuery", e),
            GraphError::Format { .. } => Self::internal(e),
            GraphError::Io(_) => Self::internal(e),
        }
    }
}

impl From<DisambiguationError> for ApiError {
    fn from(e: DisambiguationError) -> Self {
        Self::bad_request("DisambiguationError", e)
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Ingest(e) => e.into(),
            PipelineError::Disambiguation(e) => e.into(),
            PipelineError::Graph(e) => e.into(),
        }
    }
}

impl From<InspectionError> for ApiError {
    fn from(e: InspectionError) -> Self {
        match e {
            InspectionError::UnknownDatabook(_) => Self::new(StatusCode::NOT_FOUND, "UnknownDatabook", e),
            InspectionError::UnknownNode(_) => Self::new(StatusCode::NOT_FOUND, "UnknownNode", e),
            InspectionError::ZeroDepth => Self::bad_request("InvalidQuery", e),
            InspectionError::InvalidRule { .. } | InspectionError::RulesFormat(_) => Self::bad_request("SchemaError", e),
            InspectionError::EmptyTruth | InspectionError::EmptyCorpus => Self::bad_request("InvalidInput", e),
        }
    }
}

impl From<WorkloadError> for ApiError {
    fn from(e: WorkloadError) -> Self {
        match e {
            WorkloadError::InvalidSpec(_) => Self::bad_request("SchemaError", e),
            WorkloadError::Graph(g) => g.into(),
            other => Self::internal(other),
        }
    }
}

impl From<CentralityError> for ApiError {
    fn from(e: CentralityError) -> Self {
        Self::bad_request("InvalidQuery", e)
    }
}

impl From<BytesRejection> for ApiError {
    fn from(e: BytesRejection) -> Self {
        let status = e.status();
        Self::new(status, "BadBody", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request("InvalidQuery", e.body_text())
    }
}

fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request("SyntaxError", e))?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ApiError::bad_request("SchemaError", format!("at `{path}`: {}", e.into_inner()))
    })
}

/// Documents and the graph built from them, published together.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: DocumentSet,
    pub graph: PropertyGraph,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Allowed browser origins; `*` allows any.
    pub cors_origins: Vec<String>,
    /// Directory for named save/load slots.
    pub slot_dir: PathBuf,
    pub filter: FilterConfig,
    pub topic_keys: TopicKeys,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: DEFAULT_LISTEN.parse().expect("valid default address"),
            cors_origins: vec!["http://localhost:5173".into(), "http://127.0.0.1:5173".into()],
            slot_dir: PathBuf::from("graphled-slots"),
            filter: FilterConfig::default(),
            topic_keys: TopicKeys::default(),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    active: RwLock<Arc<Corpus>>,
    writer: Mutex<()>,
    filter: FilterConfig,
    topic_keys: TopicKeys,
    slot_dir: PathBuf,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                active: RwLock::new(Arc::new(Corpus::default())),
                writer: Mutex::new(()),
                filter: config.filter.clone(),
                topic_keys: config.topic_keys.clone(),
                slot_dir: config.slot_dir.clone(),
            }),
        }
    }

    pub fn snapshot(&self) -> Arc<Corpus> {
        self.inner.active.read().clone()
    }

    fn publish(&self, corpus: Corpus) {
        *self.inner.active.write() = Arc::new(corpus);
    }

    /// Rebuilds the graph for `documents` and makes it the active corpus.
    fn rebuild(&self, documents: DocumentSet) -> Result<crate::pipeline::PipelineCounts, ApiError> {
        let out = run_pipeline(&documents, &self.inner.filter, &self.inner.topic_keys)?;
        self.publish(Corpus {
            documents,
            graph: out.graph,
        });
        Ok(out.counts)
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestResponse {
    pub databooks: usize,
    pub documents: usize,
    pub mentions: usize,
}

async fn ingest(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let body = body?;
    let resp = blocking(move || {
        let batch = parse_loader_json(&body)?;
        let _writer = state.inner.writer.lock();
        let current = state.snapshot();
        for d in batch.documents() {
            if current.documents.document(&d.doc_id).is_some() {
                return Err(GraphError::DuplicateDocument(d.doc_id.clone()).into());
            }
        }
        for b in batch.databooks() {
            if current.documents.databook(&b.databook_id).is_some() {
                return Err(GraphError::DuplicateDatabook(b.databook_id.clone()).into());
            }
        }
        let mentions = crate::ingest::extract_entities(&batch, &state.inner.topic_keys).len();
        let resp = IngestResponse {
            databooks: batch.databooks().len(),
            documents: batch.documents().len(),
            mentions,
        };
        let merged = current.documents.clone().merge(batch)?;
        state.rebuild(merged)?;
        Ok(resp)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(resp)).into_response())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub node_count: usize,
    pub edge_count: usize,
    pub labels: BTreeMap<Label, usize>,
}

pub fn summarize(g: &PropertyGraph) -> GraphSummary {
    GraphSummary {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        labels: g.label_histogram().into_iter().filter(|(_, c)| *c > 0).collect(),
    }
}

async fn summary(State(state): State<AppState>) -> Json<GraphSummary> {
    Json(summarize(&state.snapshot().graph))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraverseResponse {
    pub count: usize,
    pub triples: Vec<Triple>,
}

async fn query_traverse(
    State(state): State<AppState>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<TraverseResponse>, ApiError> {
    let query: TraversalQuery = parse_body(&body?)?;
    let triples = traverse(&state.snapshot().graph, &query)?;
    Ok(Json(TraverseResponse {
        count: triples.len(),
        triples,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResponse {
    pub metric: Metric,
    pub eigenvector_converged: bool,
    pub rows: Vec<CentralityRow>,
}

async fn centrality(
    State(state): State<AppState>,
    params: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Result<Json<CentralityResponse>, ApiError> {
    let Query(params) = params?;
    let metric: Metric = params.get("metric").map_or("relevance", String::as_str).parse()?;
    let top = match params.get("top") {
        Some(t) => Some(
            t.parse::<usize>()
                .map_err(|_| ApiError::bad_request("InvalidQuery", format!("top must be a count, got `{t}`")))?,
        ),
        None => None,
    };
    let snapshot = state.snapshot();
    let resp = blocking(move || {
        let table = CentralityTable::compute(&snapshot.graph);
        let mut rows: Vec<CentralityRow> = table.ranked(metric).into_iter().cloned().collect();
        if let Some(k) = top {
            rows.truncate(k);
        }
        Ok(CentralityResponse {
            metric,
            eigenvector_converged: table.eigenvector_converged,
            rows,
        })
    })
    .await?;
    Ok(Json(resp))
}

async fn completeness(
    State(state): State<AppState>,
    Path(databook_id): Path<String>,
) -> Result<Json<CompletenessReport>, ApiError> {
    Ok(Json(check_databook(&state.snapshot().graph, &databook_id)?))
}

async fn conformance(
    State(state): State<AppState>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<Vec<ConformanceResult>>, ApiError> {
    let rules: Vec<ConformanceRule> = parse_body(&body?)?;
    Ok(Json(check_conformance(&state.snapshot().documents, &rules)?))
}

async fn trace_doc(
    State(state): State<AppState>,
    Path(doc_id): Path<String>,
    params: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Result<Json<TraceReport>, ApiError> {
    let Query(params) = params?;
    let depth = match params.get("max_depth") {
        Some(d) => d
            .parse::<usize>()
            .map_err(|_| ApiError::bad_request("InvalidQuery", format!("max_depth must be a positive integer, got `{d}`")))?,
        None => DEFAULT_TRACE_DEPTH,
    };
    Ok(Json(trace(&state.snapshot().graph, &doc_id, depth)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeleteResponse {
    pub databook_id: String,
    pub removed_documents: Vec<String>,
}

async fn delete_databook(
    State(state): State<AppState>,
    Path(databook_id): Path<String>,
) -> Result<Json<DeleteResponse>, ApiError> {
    let resp = blocking(move || {
        let _writer = state.inner.writer.lock();
        let mut documents = state.snapshot().documents.clone();
        let removed = documents
            .remove_databook(&databook_id)
            .ok_or_else(|| ApiError::from(InspectionError::UnknownDatabook(databook_id.clone())))?;
        state.rebuild(documents)?;
        Ok(DeleteResponse {
            databook_id,
            removed_documents: removed,
        })
    })
    .await?;
    Ok(Json(resp))
}

async fn benchmark(body: Result<Bytes, BytesRejection>) -> Result<Json<BenchmarkReport>, ApiError> {
    let spec: WorkloadSpec = parse_body(&body?)?;
    spec.validate()?;
    let report = blocking(move || Ok(run_benchmark(&spec)?.0)).await?;
    Ok(Json(report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotResponse {
    pub slot: String,
    pub node_count: usize,
    pub edge_count: usize,
}

fn slot_paths(state: &AppState, slot: &str) -> Result<(PathBuf, PathBuf), ApiError> {
    let valid = !slot.is_empty() && slot.len() <= 64 && slot.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !valid {
        return Err(ApiError::bad_request("InvalidSlot", format!("slot name `{slot}` must be 1-64 of [A-Za-z0-9_-]")));
    }
    let dir = &state.inner.slot_dir;
    Ok((dir.join(format!("{slot}.graph")), dir.join(format!("{slot}.documents.json"))))
}

async fn save_slot(State(state): State<AppState>, Path(slot): Path<String>) -> Result<Json<SlotResponse>, ApiError> {
    let resp = blocking(move || {
        let (graph_path, docs_path) = slot_paths(&state, &slot)?;
        std::fs::create_dir_all(&state.inner.slot_dir).map_err(ApiError::internal)?;
        let snapshot = state.snapshot();
        graph::save(&snapshot.graph, &graph_path)?;
        std::fs::write(&docs_path, snapshot.documents.to_loader_json()).map_err(ApiError::internal)?;
        Ok(SlotResponse {
            slot,
            node_count: snapshot.graph.node_count(),
            edge_count: snapshot.graph.edge_count(),
        })
    })
    .await?;
    Ok(Json(resp))
}

async fn load_slot(State(state): State<AppState>, Path(slot): Path<String>) -> Result<Json<SlotResponse>, ApiError> {
    let resp = blocking(move || {
        let (graph_path, docs_path) = slot_paths(&state, &slot)?;
        if !graph_path.exists() || !docs_path.exists() {
            return Err(ApiError::new(StatusCode::NOT_FOUND, "UnknownSlot", format!("no saved slot `{slot}`")));
        }
        let _writer = state.inner.writer.lock();
        let graph = graph::load(&graph_path)?;
        let documents = crate::ingest::read_loader_file(&docs_path)?;
        let resp = SlotResponse {
            slot,
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
        };
        state.publish(Corpus { documents, graph });
        Ok(resp)
    })
    .await?;
    Ok(Json(resp))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "MethodNotAllowed", "method not allowed on this route")
}

fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    if origins.iter().any(|o| o == "*") {
        return layer.allow_origin(Any);
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    layer.allow_origin(AllowOrigin::list(list))
}

pub fn router(state: AppState, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/v1/ingest", post(ingest))
        .route("/v1/graph/summary", get(summary))
        .route("/v1/graph/{databook_id}", delete(delete_databook))
        .route("/v1/graph/save/{slot}", post(save_slot))
        .route("/v1/graph/load/{slot}", post(load_slot))
        .route("/v1/query/traverse", post(query_traverse))
        .route("/v1/centrality", get(centrality))
        .route("/v1/inspect/completeness/{databook_id}", get(completeness))
        .route("/v1/inspect/conformance", post(conformance))
        .route("/v1/inspect/trace/{doc_id}", get(trace_doc))
        .route("/v1/benchmark", post(benchmark))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(cors(cors_origins))
        .with_state(state)
}

pub fn app(config: &ServiceConfig) -> Router {
    router(AppState::new(config), &config.cors_origins)
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app(&config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
