use std::path::Path;
use std::process::{Command, Output};

use graphled::centrality::{CentralityTable, Metric};
use graphled::graph;
use graphled::ingest::TopicKeys;
use graphled::pipeline::run_pipeline;
use graphled::synth;
use graphled::workload::Pattern;

fn graphled(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphled"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ingest_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let star = synth::complete_star();
    std::fs::write(dir.path().join("star.json"), star.to_loader_json()).unwrap();

    let o = graphled(dir.path(), &["ingest", "star.json", "--out", "star.graph"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let from_cli = graph::load(&dir.path().join("star.graph")).unwrap();
    let from_lib = run_pipeline(&star, &Default::default(), &TopicKeys::default()).unwrap().graph;
    assert!(from_cli.logically_eq(&from_lib));

    let o = graphled(dir.path(), &["centrality", "star.graph", "--metric", "relevance"]);
    assert!(o.status.success());
    let table = CentralityTable::compute(&from_lib);
    let mut expected = Vec::new();
    CentralityTable::write_csv(table.ranked(Metric::Relevance), &mut expected).unwrap();
    assert_eq!(stdout(&o).into_bytes(), expected);
}

#[test]
fn disambiguate_reports_supplier_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphled(dir.path(), &["generate", "suppliers", "--out", "s.json"]);
    assert!(o.status.success());
    let o = graphled(dir.path(), &["disambiguate", "s.json", "--ground-truth", "17", "--report", "r.json"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("removal: 99.10%"), "{text}");
    assert!(text.contains("reduction: 85.94%"), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report.is_object());
}

#[test]
fn completeness_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    graphled(dir.path(), &["generate", "star", "--out", "star.json"]);
    graphled(dir.path(), &["generate", "incomplete", "--out", "inc.json"]);

    let o = graphled(dir.path(), &["inspect", "completeness", "--input", "star.json"]);
    assert_eq!(o.status.code(), Some(0));

    let o = graphled(dir.path(), &["inspect", "completeness", "--input", "inc.json", "--databook", "DB-PARTIAL"]);
    assert_eq!(o.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports[0]["isolated_documents"], serde_json::json!(["MC-5005", "MC-5006"]));

    let o = graphled(dir.path(), &["inspect", "completeness", "--input", "inc.json", "--databook", "DB-NONE"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["code"], "UnknownDatabook");
}

#[test]
fn conformance_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    graphled(dir.path(), &["generate", "star", "--out", "star.json"]);
    let rules = r#"[{"rule_id": "grade", "doc_type": "material-certificate", "field_key": "GRADE",
                     "check": {"kind": "value_in_set", "values": ["X52", "X60"]}}]"#;
    std::fs::write(dir.path().join("rules.json"), rules).unwrap();
    let o = graphled(dir.path(), &["inspect", "conformance", "--input", "star.json", "--rules", "rules.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let strict = rules.replace(r#"["X52", "X60"]"#, r#"["X60"]"#);
    std::fs::write(dir.path().join("strict.json"), strict).unwrap();
    let o = graphled(dir.path(), &["inspect", "conformance", "--input", "star.json", "--rules", "strict.json"]);
    assert_eq!(o.status.code(), Some(1));

    let o = graphled(dir.path(), &["inspect", "trace", "--input", "star.json", "--doc", "PO-1001"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["complete_trace"], true);
}

#[test]
fn bench_emits_one_row_per_pattern() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), r#"{"n": 1, "concurrency": 1, "seed": 5}"#).unwrap();
    let o = graphled(dir.path(), &["bench", "--spec", "spec.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pattern,runs,avg_ms,min_ms,max_ms"));
    let names: Vec<&str> = lines.filter(|l| !l.starts_with('#')).map(|l| l.split(',').next().unwrap()).collect();
    let mut expected: Vec<&str> = Pattern::ALL.iter().map(|p| p.as_str()).collect();
    expected.push("total");
    assert_eq!(names, expected);
}

#[test]
fn ocr_eval_grades_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphled(dir.path(), &["generate", "ocr-easy", "--out", "easy.json", "--count", "2000"]);
    assert!(o.status.success());
    let o = graphled(dir.path(), &["ocr-eval", "easy.json"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("fields: 2000\n"), "{text}");
    let total: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("total hit: "))
        .and_then(|v| v.trim_end_matches('%').parse().ok())
        .unwrap();
    assert!((total - 85.9).abs() < 5.0, "{total}");
}

#[test]
fn bad_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{").unwrap();
    let o = graphled(dir.path(), &["ingest", "broken.json", "--out", "g.graph"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["code"], "SyntaxError");
}
