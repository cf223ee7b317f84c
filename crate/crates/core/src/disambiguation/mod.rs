//! Entity disambiguation.
//!
//! OCR output spells the same supplier, batch or order number in many ways.
//! Values are first reduced to a comparison key ([`normalize_tokens`]),
//! then every pair of keys that share a field key is run through three
//! string filters in a fixed order:
//!
//! 1. Levenshtein: normalized edit distance, only between strings of
//!    comparable length;
//! 2. LCS: longest common subsequence over the longer length;
//! 3. sequence matcher: Ratcliff/Obershelp ratio with junk characters.
//!
//! A pair is linked as soon as one filter accepts it. Linked keys are
//! clustered by connected components and every cluster is rewritten to its
//! most frequent raw spelling. Every change is logged as a
//! [`ProvenanceRecord`] so a canonical node can be traced back to the
//! document fields it came from.

mod lcs;
mod levenshtein;
mod normalize;
mod sequence_matcher;
mod union_find;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lcs::{lcs_accepts, lcs_length, lcs_similarity};
pub use levenshtein::{lev_accepts, levenshtein_distance};
pub use normalize::{normalize_tokens, parse_stopwords, read_stopwords};
pub use sequence_matcher::{
    matched_chars, matching_blocks, sequence_matcher_ratio, sm_accepts, MatchBlock,
};
pub use union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DisambiguationError {
    #[error("value `{0}` is empty after normalization")]
    EmptyAfterNormalize(String),
    #[error("invalid filter configuration: {0}")]
    Config(String),
    #[error("no mentions to disambiguate")]
    NoMentions,
    #[error("ratio undefined: {0}")]
    DivisionDomain(String),
}

/// A topic value as it was read from one document field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityMention {
    pub doc_id: String,
    pub key: String,
    pub raw_value: String,
}

impl EntityMention {
    pub fn new(doc_id: &str, key: &str, raw_value: &str) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            key: key.to_string(),
            raw_value: raw_value.to_string(),
        }
    }
}

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "and", "co", "company", "corp", "corporation", "da", "de", "do", "group", "grupo", "inc",
    "incorporated", "limited", "llc", "ltd", "ltda", "of", "the",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub stopwords: BTreeSet<String>,
    pub lev_max_norm_dist: f64,
    /// Accepted `min(|a|,|b|) / max(|a|,|b|)` range for the Levenshtein filter.
    pub lev_len_ratio_band: (f64, f64),
    pub lcs_min_sim: f64,
    pub sm_min_ratio: f64,
    pub junk_chars: BTreeSet<char>,
    /// Field keys whose values are identifiers: only exact matches after
    /// normalization are merged.
    pub exact_keys: BTreeSet<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            lev_max_norm_dist: 0.2,
            lev_len_ratio_band: (0.8, 1.25),
            lcs_min_sim: 0.8,
            sm_min_ratio: 0.85,
            junk_chars: [' '].into_iter().collect(),
            exact_keys: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterConfigFile {
    stopwords: Option<Vec<String>>,
    stopwords_file: Option<String>,
    lev_max_norm_dist: Option<f64>,
    lev_len_ratio_band: Option<(f64, f64)>,
    lcs_min_sim: Option<f64>,
    sm_min_ratio: Option<f64>,
    junk_chars: Option<String>,
    exact_keys: Option<Vec<String>>,
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), DisambiguationError> {
        let ratios = [
            ("lev_max_norm_dist", self.lev_max_norm_dist),
            ("lcs_min_sim", self.lcs_min_sim),
            ("sm_min_ratio", self.sm_min_ratio),
        ];
        for (name, v) in ratios {
            if !(0.0..=1.0).contains(&v) {
                return Err(DisambiguationError::Config(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        let (low, high) = self.lev_len_ratio_band;
        if !((0.0..=1.0).contains(&low) && high >= 1.0 && high.is_finite()) {
            return Err(DisambiguationError::Config(format!(
                "lev_len_ratio_band ({low}, {high}) must satisfy 0 <= low <= 1 <= high"
            )));
        }
        Ok(())
    }

    /// Reads `key = value` settings over the defaults. A relative
    /// `stopwords_file` is resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self, DisambiguationError> {
        let file: FilterConfigFile =
            toml::from_str(text).map_err(|e| DisambiguationError::Config(e.to_string()))?;
        let mut cfg = FilterConfig::default();
        if let Some(words) = file.stopwords {
            cfg.stopwords = words.into_iter().map(|w| w.to_lowercase()).collect();
        }
        if let Some(rel) = file.stopwords_file {
            let path = match base_dir {
                Some(dir) => dir.join(rel),
                None => rel.into(),
            };
            cfg.stopwords.extend(read_stopwords(&path)?);
        }
        if let Some(v) = file.lev_max_norm_dist {
            cfg.lev_max_norm_dist = v;
        }
        if let Some(v) = file.lev_len_ratio_band {
            cfg.lev_len_ratio_band = v;
        }
        if let Some(v) = file.lcs_min_sim {
            cfg.lcs_min_sim = v;
        }
        if let Some(v) = file.sm_min_ratio {
            cfg.sm_min_ratio = v;
        }
        if let Some(v) = file.junk_chars {
            cfg.junk_chars = v.chars().collect();
        }
        if let Some(v) = file.exact_keys {
            cfg.exact_keys = v.into_iter().collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, DisambiguationError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            DisambiguationError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text, path.parent())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stopword,
    Levenshtein,
    Lcs,
    SequenceMatcher,
    Canonicalize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub mention: EntityMention,
    pub stage: Stage,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub key: String,
    pub canonical: String,
    /// Distinct raw spellings, ascending.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisambiguationReport {
    /// field key -> raw value -> canonical value.
    pub canonical_of: BTreeMap<String, BTreeMap<String, String>>,
    pub clusters: Vec<Cluster>,
    pub provenance: Vec<ProvenanceRecord>,
    pub removed_count: usize,
    /// Raw values that normalized to nothing; each is its own cluster.
    pub empty_after_normalize: Vec<String>,
}

impl DisambiguationReport {
    pub fn canonical(&self, key: &str, raw: &str) -> Option<&str> {
        self.canonical_of.get(key)?.get(raw).map(String::as_str)
    }

    pub fn distinct_raw(&self) -> usize {
        self.canonical_of.values().map(BTreeMap::len).sum()
    }

    pub fn distinct_canonical(&self) -> usize {
        self.clusters.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    /// Pair comparisons sharded over the rayon pool.
    Parallel,
}

/// Runs the full pipeline sequentially.
pub fn disambiguate(
    mentions: &[EntityMention],
    cfg: &FilterConfig,
) -> Result<DisambiguationReport, DisambiguationError> {
    disambiguate_with(mentions, cfg, Execution::Sequential)
}

/// Which filter, if any, links two normalized keys.
pub fn first_accepting_stage(a: &str, b: &str, cfg: &FilterConfig) -> Option<Stage> {
    if lev_accepts(a, b, cfg) {
        Some(Stage::Levenshtein)
    } else if lcs_accepts(a, b, cfg) {
        Some(Stage::Lcs)
    } else if sm_accepts(a, b, cfg) {
        Some(Stage::SequenceMatcher)
    } else {
        None
    }
}

struct KeyGroup<'a> {
    key: &'a str,
    /// raw value -> mention count
    raw_counts: BTreeMap<&'a str, usize>,
}

pub fn disambiguate_with(
    mentions: &[EntityMention],
    cfg: &FilterConfig,
    exec: Execution,
) -> Result<DisambiguationReport, DisambiguationError> {
    if mentions.is_empty() {
        return Err(DisambiguationError::NoMentions);
    }
    cfg.validate()?;

    let mut sorted: Vec<&EntityMention> = mentions.iter().collect();
    sorted.sort();

    let mut groups: BTreeMap<&str, KeyGroup> = BTreeMap::new();
    for m in &sorted {
        let g = groups.entry(m.key.as_str()).or_insert_with(|| KeyGroup {
            key: &m.key,
            raw_counts: BTreeMap::new(),
        });
        *g.raw_counts.entry(m.raw_value.as_str()).or_default() += 1;
    }

    let mut canonical_of: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut clusters = Vec::new();
    let mut empty_after_normalize = Vec::new();
    // (key, raw) -> normalized form, None when nothing survived
    let mut normalized: BTreeMap<(&str, &str), Option<String>> = BTreeMap::new();
    // accepted links: (key, key_a, key_b, stage)
    let mut links: Vec<(&str, String, String, Stage)> = Vec::new();

    for group in groups.values() {
        let mut norm_keys: BTreeSet<String> = BTreeSet::new();
        for &raw in group.raw_counts.keys() {
            let norm = normalize_tokens(raw, cfg).ok();
            if let Some(n) = &norm {
                norm_keys.insert(n.clone());
            } else {
                empty_after_normalize.push(raw.to_string());
            }
            normalized.insert((group.key, raw), norm);
        }
        let keys: Vec<String> = norm_keys.into_iter().collect();
        let index: BTreeMap<&str, usize> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.as_str(), i))
            .collect();

        let fuzzy = !cfg.exact_keys.contains(group.key);
        let pair_links = if fuzzy {
            link_pairs(&keys, cfg, exec)
        } else {
            Vec::new()
        };
        let mut uf = UnionFind::new(keys.len());
        for &(i, j, stage) in &pair_links {
            uf.union(i, j);
            links.push((group.key, keys[i].clone(), keys[j].clone(), stage));
        }

        // raw values grouped by component root of their normalized key;
        // empty-normalized raws stand alone
        let mut members: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        let mut singletons: Vec<&str> = Vec::new();
        for &raw in group.raw_counts.keys() {
            match &normalized[&(group.key, raw)] {
                Some(n) => members.entry(uf.find(index[n.as_str()])).or_default().push(raw),
                None => singletons.push(raw),
            }
        }
        let all_clusters = members
            .into_values()
            .chain(singletons.into_iter().map(|raw| vec![raw]));
        let map = canonical_of.entry(group.key.to_string()).or_default();
        for raws in all_clusters {
            let canonical = raws
                .iter()
                .copied()
                .max_by(|a, b| {
                    group.raw_counts[a]
                        .cmp(&group.raw_counts[b])
                        .then_with(|| b.cmp(a))
                })
                .expect("cluster is non-empty");
            for raw in &raws {
                map.insert(raw.to_string(), canonical.to_string());
            }
            clusters.push(Cluster {
                key: group.key.to_string(),
                canonical: canonical.to_string(),
                members: raws.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    clusters.sort_by(|a, b| (&a.key, &a.canonical).cmp(&(&b.key, &b.canonical)));
    empty_after_normalize.sort();
    empty_after_normalize.dedup();

    let mut provenance = Vec::new();
    for m in &sorted {
        let norm = &normalized[&(m.key.as_str(), m.raw_value.as_str())];
        let after = norm.clone().unwrap_or_default();
        if after != m.raw_value {
            provenance.push(ProvenanceRecord {
                mention: (*m).clone(),
                stage: Stage::Stopword,
                before: m.raw_value.clone(),
                after,
            });
        }
        let canonical = &canonical_of[&m.key][&m.raw_value];
        if *canonical != m.raw_value {
            provenance.push(ProvenanceRecord {
                mention: (*m).clone(),
                stage: Stage::Canonicalize,
                before: m.raw_value.clone(),
                after: canonical.clone(),
            });
        }
    }
    for (key, a, b, stage) in links {
        let witness = sorted
            .iter()
            .find(|m| {
                m.key == key
                    && normalized[&(m.key.as_str(), m.raw_value.as_str())].as_deref() == Some(a.as_str())
            })
            .expect("every normalized key has a mention");
        provenance.push(ProvenanceRecord {
            mention: (*witness).clone(),
            stage,
            before: a,
            after: b,
        });
    }

    let distinct_raw: usize = canonical_of.values().map(BTreeMap::len).sum();
    let removed_count = distinct_raw - clusters.len();
    Ok(DisambiguationReport {
        canonical_of,
        clusters,
        provenance,
        removed_count,
        empty_after_normalize,
    })
}

/// All accepted pairs `(i, j, stage)` with `i < j`, in ascending order.
fn link_pairs(keys: &[String], cfg: &FilterConfig, exec: Execution) -> Vec<(usize, usize, Stage)> {
    let row = |i: usize| -> Vec<(usize, usize, Stage)> {
        (i + 1..keys.len())
            .filter_map(|j| first_accepting_stage(&keys[i], &keys[j], cfg).map(|s| (i, j, s)))
            .collect()
    };
    match exec {
        Execution::Sequential => (0..keys.len()).flat_map(row).collect(),
        Execution::Parallel => {
            let rows: Vec<Vec<_>> = (0..keys.len()).into_par_iter().map(row).collect();
            rows.into_iter().flatten().collect()
        }
    }
}

/// Ambiguity-removal figures, as fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityMetrics {
    /// Share of the ambiguous variants (`distinct_raw − ground_truth`)
    /// that were merged away; `None` without ground truth.
    pub removal_pct: Option<f64>,
    /// Share of distinct raw values merged away.
    pub reduction_pct: f64,
}

pub fn ambiguity_metrics(
    report: &DisambiguationReport,
    distinct_raw: usize,
    ground_truth: Option<usize>,
) -> Result<AmbiguityMetrics, DisambiguationError> {
    metrics_from_counts(report.removed_count, distinct_raw, ground_truth)
}

pub fn metrics_from_counts(
    removed: usize,
    distinct_raw: usize,
    ground_truth: Option<usize>,
) -> Result<AmbiguityMetrics, DisambiguationError> {
    if distinct_raw == 0 {
        return Err(DisambiguationError::DivisionDomain(
            "no distinct raw values".into(),
        ));
    }
    let reduction_pct = removed as f64 / distinct_raw as f64;
    let removal_pct = match ground_truth {
        None => None,
        Some(truth) if truth > distinct_raw => {
            return Err(DisambiguationError::DivisionDomain(format!(
                "ground truth {truth} exceeds {distinct_raw} distinct values"
            )))
        }
        Some(truth) if truth == distinct_raw => {
            if removed == 0 {
                Some(1.0)
            } else {
                return Err(DisambiguationError::DivisionDomain(format!(
                    "{removed} values removed but nothing was ambiguous"
                )));
            }
        }
        Some(truth) => Some(removed as f64 / (distinct_raw - truth) as f64),
    };
    Ok(AmbiguityMetrics {
        removal_pct,
        reduction_pct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mentions(values: &[&str]) -> Vec<EntityMention> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| EntityMention::new(&format!("D{i}"), "SUPPLIER", v))
            .collect()
    }

    #[test]
    fn single_value_single_cluster() {
        let r = disambiguate(&mentions(&["Vallourec", "Vallourec"]), &FilterConfig::default())
            .unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.removed_count, 0);
    }

    #[test]
    fn variant_forms_collapse() {
        let r = disambiguate(
            &mentions(&["supplier-A", "A-supplier", "supplier-A.inc", "group-A-supplier"]),
            &FilterConfig::default(),
        )
        .unwrap();
        assert_eq!(r.clusters.len(), 1, "{:#?}", r.clusters);
        assert_eq!(r.removed_count, 3);
        // all counts tie, so the lexicographically smallest raw wins
        assert_eq!(r.clusters[0].canonical, "A-supplier");
        assert_eq!(r.canonical("SUPPLIER", "group-A-supplier"), Some("A-supplier"));
    }

    #[test]
    fn modal_raw_value_is_canonical() {
        let r = disambiguate(
            &mentions(&["Tenaris Confab", "TENARIS CONFAB", "Tenaris Confab", "Tenaris Conf4b"]),
            &FilterConfig::default(),
        )
        .unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].canonical, "Tenaris Confab");
    }

    #[test]
    fn keys_are_never_compared_across() {
        let ms = vec![
            EntityMention::new("D1", "SUPPLIER", "Vallourec"),
            EntityMention::new("D2", "CARRIER", "Vallourec"),
        ];
        let r = disambiguate(&ms, &FilterConfig::default()).unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert_eq!(r.removed_count, 0);
    }

    #[test]
    fn exact_keys_skip_fuzzy_filters() {
        let ms = vec![
            EntityMention::new("D1", "OS_LOTE", "L-4431"),
            EntityMention::new("D2", "OS_LOTE", "L-4432"),
            EntityMention::new("D3", "OS_LOTE", "l 4431"),
        ];
        let fuzzy = disambiguate(&ms, &FilterConfig::default()).unwrap();
        assert_eq!(fuzzy.clusters.len(), 1);
        let cfg = FilterConfig {
            exact_keys: ["OS_LOTE".to_string()].into_iter().collect(),
            ..FilterConfig::default()
        };
        let exact = disambiguate(&ms, &cfg).unwrap();
        assert_eq!(exact.clusters.len(), 2);
        assert_eq!(exact.canonical("OS_LOTE", "l 4431"), Some("L-4431"));
    }

    #[test]
    fn empty_after_normalize_is_singleton() {
        let r = disambiguate(&mentions(&["The Of", "Vallourec"]), &FilterConfig::default())
            .unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert_eq!(r.empty_after_normalize, vec!["The Of".to_string()]);
        assert!(r.provenance.iter().any(|p| p.stage == Stage::Stopword
            && p.before == "The Of"
            && p.after.is_empty()));
    }

    #[test]
    fn provenance_records_change_something() {
        let r = disambiguate(
            &mentions(&["supplier-A", "A-supplier", "supplier-A.inc", "group-A-supplier"]),
            &FilterConfig::default(),
        )
        .unwrap();
        assert!(r.provenance.iter().all(|p| p.before != p.after));
        assert!(r.provenance.iter().any(|p| p.stage == Stage::Lcs));
        assert_eq!(
            r.provenance
                .iter()
                .filter(|p| p.stage == Stage::Canonicalize)
                .count(),
            3
        );
    }

    #[test]
    fn parallel_matches_sequential() {
        let values = [
            "Vallourec", "VALLOUREC", "Valourec", "Tenaris Confab", "Confab Tenaris", "Usiminas",
            "Usiminas SA", "Usimlnas", "Gerdau", "gerdau inc",
        ];
        let ms = mentions(&values);
        let cfg = FilterConfig::default();
        assert_eq!(
            disambiguate_with(&ms, &cfg, Execution::Sequential).unwrap(),
            disambiguate_with(&ms, &cfg, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(
            disambiguate(&[], &FilterConfig::default()),
            Err(DisambiguationError::NoMentions)
        );
    }

    #[test]
    fn metrics_examples() {
        let m = metrics_from_counts(110, 128, Some(17)).unwrap();
        assert!((m.removal_pct.unwrap() - 110.0 / 111.0).abs() < 1e-12);
        assert!((m.reduction_pct - 110.0 / 128.0).abs() < 1e-12);
        assert_eq!(format!("{:.2}", m.removal_pct.unwrap() * 100.0), "99.10");
        assert_eq!(format!("{:.2}", m.reduction_pct * 100.0), "85.94");

        let m = metrics_from_counts(0, 5, Some(5)).unwrap();
        assert_eq!(m.removal_pct, Some(1.0));
        assert_eq!(m.reduction_pct, 0.0);

        let m = metrics_from_counts(3, 10, Some(6)).unwrap();
        assert_eq!(m.removal_pct, Some(0.75));
        assert_eq!(m.reduction_pct, 0.3);

        assert!(metrics_from_counts(2, 5, Some(5)).is_err());
        assert!(metrics_from_counts(0, 0, None).is_err());
        assert_eq!(metrics_from_counts(1, 4, None).unwrap().removal_pct, None);
    }

    #[test]
    fn config_file_overrides() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("stop.txt"), "# extra\nholding\n").unwrap();
        let cfg = FilterConfig::from_toml_str(
            "lcs_min_sim = 0.9\nlev_len_ratio_band = [0.7, 1.5]\nstopwords_file = \"stop.txt\"\njunk_chars = \" _\"\n",
            Some(dir.path()),
        )
        .unwrap();
        assert_eq!(cfg.lcs_min_sim, 0.9);
        assert_eq!(cfg.lev_len_ratio_band, (0.7, 1.5));
        assert!(cfg.stopwords.contains("holding"));
        assert!(cfg.stopwords.contains("inc"));
        assert!(cfg.junk_chars.contains(&'_'));
        assert!(FilterConfig::from_toml_str("lcs_min_sim = 1.5", None).is_err());
        assert!(FilterConfig::from_toml_str("lev_len_ratio_band = [0.9, 0.95]", None).is_err());
        assert!(FilterConfig::from_toml_str("bogus = 1", None).is_err());
    }
}
