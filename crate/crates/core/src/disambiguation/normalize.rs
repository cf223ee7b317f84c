//! Comparison-key normalization and stopword lists.

use std::collections::BTreeSet;
use std::path::Path;

use super::{DisambiguationError, FilterConfig};

/// Lowercases `value`, turns punctuation and junk characters into token
/// separators, drops stopword tokens and joins what is left with single
/// spaces.
///
/// The result is only a comparison key; the raw value stays the display
/// form.
pub fn normalize_tokens(value: &str, cfg: &FilterConfig) -> Result<String, DisambiguationError> {
    let lowered = value.to_lowercase();
    let spaced: String = lowered
        .chars()
        .map(|c| {
            if c.is_alphanumeric() && !cfg.junk_chars.contains(&c) {
                c
            } else {
                ' '
            }
        })
        .collect();
    let kept: Vec<&str> = spaced
        .split_whitespace()
        .filter(|tok| !cfg.stopwords.contains(*tok))
        .collect();
    if kept.is_empty() {
        return Err(DisambiguationError::EmptyAfterNormalize(value.to_string()));
    }
    Ok(kept.join(" "))
}

/// Parses a stopword list: one token per line, `#` starts a comment.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|tok| !tok.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn read_stopwords(path: &Path) -> Result<BTreeSet<String>, DisambiguationError> {
    let text = std::fs::read_to_string(path).map_err(|e| DisambiguationError::Config(format!(
        "cannot read stopword file {}: {e}",
        path.display()
    )))?;
    Ok(parse_stopwords(&text))
}
