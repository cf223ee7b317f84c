//! Ratcliff/Obershelp "gestalt" matching with a junk character set.
//!
//! The longest matching block is found among non-junk characters only,
//! then widened by equal junk characters on both sides, and the procedure
//! recurses on the unmatched pieces to the left and right. Ties between
//! equally long blocks go to the one starting earliest in the first
//! string, then earliest in the second, which makes the raw block total
//! depend on argument order. [`matched_chars`] therefore reports the
//! larger of the two orientations so that the ratio is symmetric.

use std::collections::BTreeSet;

use super::FilterConfig;

/// A contiguous run `a[a_start..a_start + len] == b[b_start..b_start + len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchBlock {
    pub a_start: usize,
    pub b_start: usize,
    pub len: usize,
}

/// Matching blocks of `a` against `b` in this argument order, sorted by
/// position.
pub fn matching_blocks(a: &[char], b: &[char], junk: &BTreeSet<char>) -> Vec<MatchBlock> {
    let mut blocks = Vec::new();
    let mut pending = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = pending.pop() {
        let m = longest_match(a, b, junk, alo, ahi, blo, bhi);
        if m.len == 0 {
            continue;
        }
        if alo < m.a_start && blo < m.b_start {
            pending.push((alo, m.a_start, blo, m.b_start));
        }
        if m.a_start + m.len < ahi && m.b_start + m.len < bhi {
            pending.push((m.a_start + m.len, ahi, m.b_start + m.len, bhi));
        }
        blocks.push(m);
    }
    blocks.sort_by_key(|m| (m.a_start, m.b_start));
    blocks
}

fn longest_match(
    a: &[char],
    b: &[char],
    junk: &BTreeSet<char>,
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> MatchBlock {
    let width = bhi - blo;
    // prev[k] / cur[k]: length of the non-junk run ending at a[i], b[blo + k - 1]
    let mut prev = vec![0usize; width + 1];
    let mut cur = vec![0usize; width + 1];
    let (mut best_i, mut best_j, mut best_len) = (alo, blo, 0);
    for (i, &ai) in a.iter().enumerate().take(ahi).skip(alo) {
        for k in 1..=width {
            let j = blo + k - 1;
            cur[k] = if ai == b[j] && !junk.contains(&b[j]) {
                prev[k - 1] + 1
            } else {
                0
            };
            if cur[k] > best_len {
                best_len = cur[k];
                best_i = i + 1 - best_len;
                best_j = j + 1 - best_len;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    while best_i > alo
        && best_j > blo
        && junk.contains(&b[best_j - 1])
        && a[best_i - 1] == b[best_j - 1]
    {
        best_i -= 1;
        best_j -= 1;
        best_len += 1;
    }
    while best_i + best_len < ahi
        && best_j + best_len < bhi
        && junk.contains(&b[best_j + best_len])
        && a[best_i + best_len] == b[best_j + best_len]
    {
        best_len += 1;
    }
    MatchBlock {
        a_start: best_i,
        b_start: best_j,
        len: best_len,
    }
}

/// Total matched characters, maximized over both argument orders.
pub fn matched_chars(a: &str, b: &str, junk: &BTreeSet<char>) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let forward: usize = matching_blocks(&a, &b, junk).iter().map(|m| m.len).sum();
    let backward: usize = matching_blocks(&b, &a, junk).iter().map(|m| m.len).sum();
    forward.max(backward)
}

/// `2·M / (|a| + |b|)`; two empty strings are identical (1.0).
pub fn sequence_matcher_ratio(a: &str, b: &str, junk: &BTreeSet<char>) -> f64 {
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        return 1.0;
    }
    2.0 * matched_chars(a, b, junk) as f64 / total as f64
}

pub fn sm_accepts(a: &str, b: &str, cfg: &FilterConfig) -> bool {
    if a.is_empty() && b.is_empty() {
        return false;
    }
    sequence_matcher_ratio(a, b, &cfg.junk_chars) >= cfg.sm_min_ratio
}
