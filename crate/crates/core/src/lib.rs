//! Property-graph engine for OCR-extracted engineering databooks.
pub mod centrality;
pub mod cli;
pub mod disambiguation;
pub mod graph;
pub mod ingest;
pub mod inspection;
pub mod pipeline;
pub mod service;
pub mod synth;
pub mod workload;
