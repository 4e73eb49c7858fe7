//! Rank quality for the single-gold-document setting.

/// nDCG@k with exactly one relevant document at 1-based `rank`:
/// `1/log2(rank+1)` inside the window, 0 outside.
pub fn ndcg_from_rank(rank: usize, k: usize) -> f64 {
    assert!(rank >= 1, "ranks are 1-based");
    if rank > k {
        0.0
    } else {
        1.0 / ((rank + 1) as f64).log2()
    }
}

/// nDCG@k of `gold` within a ranked list of unique document ids. A gold
/// document absent from the list scores 0.
pub fn ndcg_at_k<S: AsRef<str>>(ranked: &[S], gold: &str, k: usize) -> f64 {
    match ranked.iter().position(|d| d.as_ref() == gold) {
        Some(pos) => ndcg_from_rank(pos + 1, k),
        None => 0.0,
    }
}

/// Arithmetic mean; empty input is 0.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
