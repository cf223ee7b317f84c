//! Loader JSON ingestion.
//!
//! The upstream OCR and form-understanding stage emits one JSON file per
//! document set: every document is a list of key/value blocks with their
//! bounding boxes and a flag telling whether the value points at data held
//! in another document. This module turns that file into a validated
//! [`DocumentSet`] and pulls out the topic mentions that later become graph
//! links.
//!
//! Raw values are never altered here; cleaning belongs to
//! [`crate::disambiguation`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::disambiguation::EntityMention;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("reference error: databook `{databook_id}` lists unknown document `{doc_id}`")]
    Reference { databook_id: String, doc_id: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Document category assigned by the form-understanding classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DocType {
    PurchaseOrder,
    MaterialCertificate,
    TestReport,
    Generic,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::PurchaseOrder,
        DocType::MaterialCertificate,
        DocType::TestReport,
        DocType::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::PurchaseOrder => "purchase-order",
            DocType::MaterialCertificate => "material-certificate",
            DocType::TestReport => "test-report",
            DocType::Generic => "generic",
        }
    }

    /// Lenient parse: anything unrecognised is `Generic`.
    pub fn parse_lenient(s: &str) -> DocType {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        DocType::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .unwrap_or(DocType::Generic)
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for DocType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DocType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(DocType::parse_lenient(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    #[serde(rename = "w")]
    pub width: u32,
    #[serde(rename = "h")]
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldBlock {
    pub key: String,
    pub value: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    #[serde(rename = "link", default)]
    pub link_hint: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub doc_type: DocType,
    pub source_file: String,
    pub blocks: Vec<FieldBlock>,
}

impl Document {
    /// First block carrying `key`, if any.
    pub fn field(&self, key: &str) -> Option<&FieldBlock> {
        self.blocks.iter().find(|b| b.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Databook {
    pub databook_id: String,
    pub document_ids: Vec<String>,
    pub required_doc_types: Vec<DocType>,
}

/// Validated collection of documents and the databooks grouping them.
///
/// A document may belong to several databooks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DocumentSet {
    documents: Vec<Document>,
    databooks: Vec<Databook>,
    #[serde(skip)]
    by_id: HashMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    documents: Vec<Document>,
    databooks: Vec<Databook>,
}

impl DocumentSet {
    /// Builds a set from parts, enforcing every invariant.
    pub fn new(documents: Vec<Document>, databooks: Vec<Databook>) -> Result<Self, IngestError> {
        let mut by_id = HashMap::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            let at = format!("documents[{i}]");
            if doc.doc_id.trim().is_empty() {
                return Err(IngestError::schema(format!("{at}.doc_id"), "empty doc_id"));
            }
            if by_id.insert(doc.doc_id.clone(), i).is_some() {
                return Err(IngestError::schema(
                    format!("{at}.doc_id"),
                    format!("duplicate doc_id `{}`", doc.doc_id),
                ));
            }
            for (j, block) in doc.blocks.iter().enumerate() {
                if block.key.trim().is_empty() {
                    return Err(IngestError::schema(
                        format!("{at}.blocks[{j}].key"),
                        "key is empty",
                    ));
                }
                if block.bbox.width == 0 || block.bbox.height == 0 {
                    return Err(IngestError::schema(
                        format!("{at}.blocks[{j}].box"),
                        "width and height must be positive",
                    ));
                }
            }
        }
        let mut seen_books = HashSet::new();
        for (i, book) in databooks.iter().enumerate() {
            if !seen_books.insert(book.databook_id.as_str()) {
                return Err(IngestError::schema(
                    format!("databooks[{i}].databook_id"),
                    format!("duplicate databook_id `{}`", book.databook_id),
                ));
            }
            if let Some(missing) = book.document_ids.iter().find(|d| !by_id.contains_key(*d)) {
                return Err(IngestError::Reference {
                    databook_id: book.databook_id.clone(),
                    doc_id: missing.clone(),
                });
            }
        }
        Ok(DocumentSet {
            documents,
            databooks,
            by_id,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn databooks(&self) -> &[Databook] {
        &self.databooks
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.documents[i])
    }

    pub fn databook(&self, databook_id: &str) -> Option<&Databook> {
        self.databooks.iter().find(|b| b.databook_id == databook_id)
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty() && self.databooks.is_empty()
    }

    /// Appends another set; ids must stay unique across both.
    pub fn merge(self, other: DocumentSet) -> Result<DocumentSet, IngestError> {
        let mut documents = self.documents;
        documents.extend(other.documents);
        let mut databooks = self.databooks;
        databooks.extend(other.databooks);
        DocumentSet::new(documents, databooks)
    }

    /// Drops a databook and every member document not shared with another
    /// databook. Returns the removed doc ids.
    pub fn remove_databook(&mut self, databook_id: &str) -> Option<Vec<String>> {
        let pos = self
            .databooks
            .iter()
            .position(|b| b.databook_id == databook_id)?;
        let book = self.databooks.remove(pos);
        let still_used: HashSet<&str> = self
            .databooks
            .iter()
            .flat_map(|b| b.document_ids.iter().map(String::as_str))
            .collect();
        let removed: Vec<String> = book
            .document_ids
            .into_iter()
            .filter(|d| !still_used.contains(d.as_str()))
            .collect();
        let drop: HashSet<&str> = removed.iter().map(String::as_str).collect();
        self.documents.retain(|d| !drop.contains(d.doc_id.as_str()));
        self.by_id = self
            .documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i))
            .collect();
        Some(removed)
    }

    /// Serializes back to loader JSON.
    pub fn to_loader_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document set serializes")
    }
}

/// Parses one loader JSON file.
pub fn parse_loader_json(bytes: &[u8]) -> Result<DocumentSet, IngestError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Syntax(e.to_string()))?;
    let raw: RawSet = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        IngestError::schema(path, e.into_inner().to_string())
    })?;
    DocumentSet::new(raw.documents, raw.databooks)
}

pub fn read_loader_file(path: &Path) -> Result<DocumentSet, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_loader_json(&bytes)
}

/// Parses several loader files into one set (e.g. one file per databook).
pub fn read_loader_files<P: AsRef<Path>>(paths: &[P]) -> Result<DocumentSet, IngestError> {
    paths.iter().try_fold(DocumentSet::default(), |acc, p| {
        acc.merge(read_loader_file(p.as_ref())?)
    })
}

/// Which block keys count as topics, i.e. values that link documents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TopicKeys {
    /// Every key that carries the link flag on at least one block.
    #[default]
    LinkHinted,
    Explicit(BTreeSet<String>),
}

impl TopicKeys {
    pub fn explicit<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TopicKeys::Explicit(keys.into_iter().map(Into::into).collect())
    }

    pub fn resolve(&self, ds: &DocumentSet) -> BTreeSet<String> {
        match self {
            TopicKeys::Explicit(keys) => keys.clone(),
            TopicKeys::LinkHinted => ds
                .documents()
                .iter()
                .flat_map(|d| d.blocks.iter())
                .filter(|b| b.link_hint)
                .map(|b| b.key.clone())
                .collect(),
        }
    }
}

/// One mention per block whose key is a topic key and whose value is not
/// blank, in document/block order.
pub fn extract_entities(ds: &DocumentSet, topic_keys: &TopicKeys) -> Vec<EntityMention> {
    let keys = topic_keys.resolve(ds);
    ds.documents()
        .iter()
        .flat_map(|doc| {
            doc.blocks
                .iter()
                .filter(|b| keys.contains(&b.key) && !b.value.trim().is_empty())
                .map(|b| EntityMention::new(&doc.doc_id, &b.key, &b.value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"documents":[{"doc_id":"D1","doc_type":"purchase-order","source_file":"a.pdf",
        "blocks":[{"key":"OS_LOTE","value":"L-4431","box":{"x":1,"y":2,"w":30,"h":10}}]}],
        "databooks":[{"databook_id":"B1","document_ids":["D1"],"required_doc_types":["purchase-order"]}]}"#;

    #[test]
    fn minimal_document_round_trips() {
        let ds = parse_loader_json(MINIMAL.as_bytes()).unwrap();
        assert_eq!(ds.documents().len(), 1);
        let doc = &ds.documents()[0];
        assert_eq!(doc.blocks.len(), 1);
        assert_eq!(doc.blocks[0].value, "L-4431");
        assert!(!doc.blocks[0].link_hint);
        let again = parse_loader_json(ds.to_loader_json().as_bytes()).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn unknown_doc_type_is_generic() {
        let text = MINIMAL.replace("\"purchase-order\",\"source_file\"", "\"invoice\",\"source_file\"");
        let ds = parse_loader_json(text.as_bytes()).unwrap();
        assert_eq!(ds.documents()[0].doc_type, DocType::Generic);
    }

    #[test]
    fn dangling_databook_reference() {
        let text = MINIMAL.replace(r#""document_ids":["D1"]"#, r#""document_ids":["D1","D9"]"#);
        match parse_loader_json(text.as_bytes()) {
            Err(IngestError::Reference { doc_id, .. }) => assert_eq!(doc_id, "D9"),
            other => panic!("expected reference error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_syntax_error() {
        assert!(matches!(
            parse_loader_json(b"{\"documents\": ["),
            Err(IngestError::Syntax(_))
        ));
    }

    #[test]
    fn missing_field_names_path() {
        let text = MINIMAL.replace(r#""value":"L-4431","#, "");
        match parse_loader_json(text.as_bytes()) {
            Err(IngestError::Schema { path, message }) => {
                assert_eq!(path, "documents[0].blocks[0]");
                assert!(message.contains("value"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn blank_key_and_zero_box_rejected() {
        let blank = MINIMAL.replace(r#""key":"OS_LOTE""#, r#""key":"  ""#);
        assert!(matches!(
            parse_loader_json(blank.as_bytes()),
            Err(IngestError::Schema { ref path, .. }) if path == "documents[0].blocks[0].key"
        ));
        let flat = MINIMAL.replace(r#""h":10"#, r#""h":0"#);
        assert!(matches!(
            parse_loader_json(flat.as_bytes()),
            Err(IngestError::Schema { .. })
        ));
        let negative = MINIMAL.replace(r#""x":1"#, r#""x":-1"#);
        assert!(matches!(
            parse_loader_json(negative.as_bytes()),
            Err(IngestError::Schema { .. })
        ));
    }

    #[test]
    fn mentions_follow_topic_keys() {
        let ds = parse_loader_json(MINIMAL.as_bytes()).unwrap();
        let m = extract_entities(&ds, &TopicKeys::explicit(["OS_LOTE"]));
        assert_eq!(m.len(), 1);
        assert_eq!(
            (m[0].doc_id.as_str(), m[0].key.as_str(), m[0].raw_value.as_str()),
            ("D1", "OS_LOTE", "L-4431")
        );
        assert!(extract_entities(&ds, &TopicKeys::explicit(["SUPPLIER"])).is_empty());
        // default: link-flagged keys only, none here
        assert!(extract_entities(&ds, &TopicKeys::LinkHinted).is_empty());
    }

    #[test]
    fn remove_databook_keeps_shared_documents() {
        let text = r#"{"documents":[
            {"doc_id":"A","doc_type":"generic","source_file":"a","blocks":[]},
            {"doc_id":"B","doc_type":"generic","source_file":"b","blocks":[]}],
          "databooks":[
            {"databook_id":"X","document_ids":["A","B"],"required_doc_types":[]},
            {"databook_id":"Y","document_ids":["B"],"required_doc_types":[]}]}"#;
        let mut ds = parse_loader_json(text.as_bytes()).unwrap();
        assert_eq!(ds.remove_databook("X").unwrap(), vec!["A".to_string()]);
        assert!(ds.document("A").is_none());
        assert!(ds.document("B").is_some());
        assert!(ds.remove_databook("X").is_none());
    }
}
