//! Command-line front end. Every subcommand is a thin wrapper over the
//! library call of the same name.
//!
//! Exit codes: 0 success, 1 an inspection found a problem, 2 any error
//! (printed to stderr as an [`ApiError`] JSON object).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::centrality::{CentralityTable, Metric};
use crate::disambiguation::{ambiguity_metrics, FilterConfig};
use crate::graph::{self, PropertyGraph};
use crate::ingest::{read_loader_files, DocumentSet, TopicKeys};
use crate::inspection::{
    all_conformant, check_conformance, check_databook, classify_ocr_accuracy, corpus_accuracy_summary, parse_rules,
    trace, OcrPair, DEFAULT_TRACE_DEPTH,
};
use crate::pipeline::{disambiguate_set, run_pipeline};
use crate::service::{self, ApiError, ServiceConfig, DEFAULT_LISTEN, LISTEN_ENV};
use crate::synth::{self, OcrProfile};
use crate::workload::{run_benchmark, WorkloadSpec};

#[derive(Debug, Parser)]
#[command(name = "graphled", version, about = "Property-graph engine for OCR-extracted engineering databooks")]
pub struct Cli {
    /// RNG seed for commands that generate data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Filter thresholds and stopwords (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field keys that become topics; defaults to keys flagged `link`.
    #[arg(long, value_delimiter = ',')]
    pub topic_keys: Vec<String>,
}

impl PipelineArgs {
    fn filter(&self) -> Result<FilterConfig, ApiError> {
        match &self.config {
            Some(p) => Ok(FilterConfig::from_file(p)?),
            None => Ok(FilterConfig::default()),
        }
    }

    fn keys(&self) -> TopicKeys {
        if self.topic_keys.is_empty() {
            TopicKeys::LinkHinted
        } else {
            TopicKeys::explicit(self.topic_keys.iter().cloned())
        }
    }
}

/// Where an inspection reads its graph from.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// A saved graph.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Loader JSON, built on the fly.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, disambiguate and build, then save the graph.
    Ingest {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Run disambiguation only and report how much ambiguity was removed.
    Disambiguate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Known number of distinct real-world entities.
        #[arg(long)]
        ground_truth: Option<usize>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Completeness, conformance or traceability checks.
    Inspect {
        #[command(subcommand)]
        check: InspectCommand,
    },
    /// Centrality table as CSV.
    Centrality {
        graph: PathBuf,
        #[arg(long, default_value = "relevance")]
        metric: String,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Run a workload spec and write the latency table.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grade OCR output against ground truth.
    OcrEval { pairs: PathBuf },
    /// Start the HTTP API.
    Serve {
        #[arg(long, env = LISTEN_ENV, default_value = DEFAULT_LISTEN)]
        listen: String,
        /// Allowed browser origin; repeatable, `*` for any.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
        #[arg(long, default_value = "graphled-slots")]
        slot_dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write a synthetic corpus.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        #[arg(long)]
        out: PathBuf,
        /// Fields (ocr) or databooks (corpus).
        #[arg(long)]
        count: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum InspectCommand {
    Completeness {
        #[command(flatten)]
        source: GraphSource,
        /// Databook to check; all databooks when omitted.
        #[arg(long)]
        databook: Option<String>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    Conformance {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        rules: PathBuf,
    },
    Trace {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        doc: String,
        #[arg(long, default_value_t = DEFAULT_TRACE_DEPTH)]
        max_depth: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Suppliers,
    OcrEasy,
    OcrDifficult,
    Star,
    Incomplete,
    Corpus,
}

/// Whether the command's checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ApiError {
    ApiError::new(
        axum::http::StatusCode::INTERNAL_SERVER_ERROR,
        "IoError",
        format!("{}: {e}", path.display()),
    )
}

fn read(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), ApiError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), ApiError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(Path::new("<stdout>"), e))?;
    writeln!(out, "{text}").map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn load_graph(source: &GraphSource, pipeline: &PipelineArgs) -> Result<PropertyGraph, ApiError> {
    match (&source.graph, &source.input) {
        (Some(path), _) => Ok(graph::load(path)?),
        (None, Some(input)) => {
            let ds = read_loader_files(std::slice::from_ref(input))?;
            Ok(run_pipeline(&ds, &pipeline.filter()?, &pipeline.keys())?.graph)
        }
        (None, None) => unreachable!("clap requires one source"),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(2)
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Verdict, ApiError> {
    let seed = cli.seed.unwrap_or(0);
    let say = |out: &mut dyn Write, line: String| writeln!(out, "{line}").map_err(|e| io_err(Path::new("<stdout>"), e));
    match cli.command {
        Command::Ingest { inputs, out: path, pipeline } => {
            let ds = read_loader_files(&inputs)?;
            let built = run_pipeline(&ds, &pipeline.filter()?, &pipeline.keys())?;
            let bytes = graph::save(&built.graph, &path)?;
            print_json(out, &built.counts)?;
            say(
                out,
                format!(
                    "wrote {} ({} nodes, {} edges, {bytes} bytes)",
                    path.display(),
                    built.graph.node_count(),
                    built.graph.edge_count()
                ),
            )?;
            Ok(Verdict::Pass)
        }
        Command::Disambiguate {
            inputs,
            report,
            ground_truth,
            pipeline,
        } => {
            let ds = read_loader_files(&inputs)?;
            let (rep, mentions) = disambiguate_set(&ds, &pipeline.filter()?, &pipeline.keys())?;
            if let Some(path) = report {
                write(&path, &rep.to_json())?;
            }
            say(
                out,
                format!(
                    "mentions: {mentions}\ndistinct raw values: {}\ncanonical values: {}\nremoved: {}",
                    rep.distinct_raw(),
                    rep.distinct_canonical(),
                    rep.removed_count
                ),
            )?;
            if rep.distinct_raw() > 0 {
                let m = ambiguity_metrics(&rep, rep.distinct_raw(), ground_truth)?;
                if let Some(r) = m.removal_pct {
                    say(out, format!("removal: {:.2}%", 100.0 * r))?;
                }
                say(out, format!("reduction: {:.2}%", 100.0 * m.reduction_pct))?;
            }
            Ok(Verdict::Pass)
        }
        Command::Inspect { check } => inspect(check, out),
        Command::Centrality { graph: path, metric, top } => {
            let metric: Metric = metric.parse()?;
            let g = graph::load(&path)?;
            let table = CentralityTable::compute(&g);
            let mut rows = table.ranked(metric);
            if let Some(k) = top {
                rows.truncate(k);
            }
            CentralityTable::write_csv(rows, &mut *out).map_err(|e| io_err(Path::new("<stdout>"), e))?;
            Ok(Verdict::Pass)
        }
        Command::Bench { spec, out: path } => {
            let mut spec = WorkloadSpec::from_json(&read(&spec)?)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let (report, _) = run_benchmark(&spec)?;
            let csv = report.to_csv();
            match path {
                Some(p) => write(&p, &csv)?,
                None => say(out, csv.trim_end().to_string())?,
            }
            say(
                out,
                format!(
                    "# {} operations, {} nodes, {} edges, {:.0} ms",
                    report.total_runs, report.node_count, report.edge_count, report.wall_ms
                ),
            )?;
            Ok(Verdict::Pass)
        }
        Command::OcrEval { pairs } => {
            let pairs: Vec<OcrPair> =
                serde_json::from_str(&read(&pairs)?).map_err(|e| ApiError::new(axum::http::StatusCode::BAD_REQUEST, "SchemaError", e))?;
            let labels = pairs
                .iter()
                .map(|p| classify_ocr_accuracy(&p.ocr, &p.truth))
                .collect::<Result<Vec<_>, _>>()?;
            let s = corpus_accuracy_summary(&labels)?;
            say(
                out,
                format!(
                    "fields: {}\ntotal hit: {:.2}%\npartial hit: {:.2}%\ninconsistency: {:.2}%",
                    s.fields, s.total_hit_pct, s.partial_pct, s.inconsistency_pct
                ),
            )?;
            Ok(Verdict::Pass)
        }
        Command::Serve {
            listen,
            cors_origins,
            slot_dir,
            pipeline,
        } => {
            let mut config = ServiceConfig {
                listen: listen
                    .parse()
                    .map_err(|e| ApiError::new(axum::http::StatusCode::BAD_REQUEST, "InvalidListen", format!("{listen}: {e}")))?,
                slot_dir,
                filter: pipeline.filter()?,
                topic_keys: pipeline.keys(),
                ..ServiceConfig::default()
            };
            if !cors_origins.is_empty() {
                config.cors_origins = cors_origins;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| io_err(Path::new("<runtime>"), e))?;
            rt.block_on(service::serve(config)).map_err(|e| io_err(Path::new(&listen), e))?;
            Ok(Verdict::Pass)
        }
        Command::Generate { kind, out: path, count } => {
            let text = match kind {
                GenerateKind::Suppliers => synth::supplier_replica(seed).documents.to_loader_json(),
                GenerateKind::OcrEasy => ocr_json(OcrProfile::EASY, count.unwrap_or(5000), seed),
                GenerateKind::OcrDifficult => ocr_json(OcrProfile::DIFFICULT, count.unwrap_or(5000), seed),
                GenerateKind::Star => synth::complete_star().to_loader_json(),
                GenerateKind::Incomplete => synth::incomplete_databook().to_loader_json(),
                GenerateKind::Corpus => synth::databook_corpus(count.unwrap_or(81), seed).to_loader_json(),
            };
            write(&path, &text)?;
            say(out, format!("wrote {}", path.display()))?;
            Ok(Verdict::Pass)
        }
    }
}

fn ocr_json(profile: OcrProfile, fields: usize, seed: u64) -> String {
    serde_json::to_string_pretty(&synth::ocr_corpus(profile, fields, seed)).expect("pairs serialize")
}

fn databook_ids(g: &PropertyGraph) -> Vec<String> {
    let mut ids: Vec<String> = g
        .nodes_with_label(crate::graph::Label::Databook)
        .filter_map(|id| g.node(id))
        .filter_map(|n| n.props.get("databook_id").cloned())
        .collect();
    ids.sort();
    ids
}

fn inspect(check: InspectCommand, out: &mut dyn Write) -> Result<Verdict, ApiError> {
    let verdict = |ok: bool| if ok { Verdict::Pass } else { Verdict::Fail };
    match check {
        InspectCommand::Completeness {
            source,
            databook,
            pipeline,
        } => {
            let g = load_graph(&source, &pipeline)?;
            let ids = match databook {
                Some(id) => vec![id],
                None => databook_ids(&g),
            };
            let reports = ids
                .iter()
                .map(|id| check_databook(&g, id))
                .collect::<Result<Vec<_>, _>>()?;
            print_json(out, &reports)?;
            Ok(verdict(reports.iter().all(|r| r.is_complete)))
        }
        InspectCommand::Conformance { input, rules } => {
            let ds: DocumentSet = read_loader_files(&input)?;
            let rules = parse_rules(&read(&rules)?)?;
            let results = check_conformance(&ds, &rules)?;
            print_json(out, &results)?;
            Ok(verdict(all_conformant(&results)))
        }
        InspectCommand::Trace {
            source,
            doc,
            max_depth,
            pipeline,
        } => {
            let g = load_graph(&source, &pipeline)?;
            let report = trace(&g, &doc, max_depth)?;
            print_json(out, &report)?;
            Ok(verdict(report.complete_trace))
        }
    }
}
