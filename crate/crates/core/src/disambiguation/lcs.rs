use super::FilterConfig;

/// Length of the longest common (not necessarily contiguous) subsequence.
pub fn lcs_length(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (long, short) = if a.len() >= b.len() { (&a, &b) } else { (&b, &a) };
    let mut row = vec![0usize; short.len() + 1];
    for &lc in long.iter() {
        let mut diag = 0;
        for (j, &sc) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if lc == sc {
                diag + 1
            } else {
                above.max(row[j])
            };
            diag = above;
        }
    }
    row[short.len()]
}

pub fn lcs_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    lcs_length(a, b) as f64 / longest as f64
}

pub fn lcs_accepts(a: &str, b: &str, cfg: &FilterConfig) -> bool {
    if a.is_empty() && b.is_empty() {
        return false;
    }
    lcs_similarity(a, b) >= cfg.lcs_min_sim
}
