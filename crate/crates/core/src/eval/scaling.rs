//! Context-scaling study harness: carve nested token windows out of one
//! document and pin a fixed query span inside the smallest window, so the
//! same information need can be retrieved against growing contexts.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repr::tokenize_spans;

pub const DEFAULT_QUERY_TOKENS: usize = 100;
pub const DEFAULT_WINDOW_SIZES: [usize; 4] = [500, 1000, 4000, 8000];

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("document too short: {required} tokens required, {available} available")]
    TooShort { required: usize, available: usize },
    #[error("bad window configuration: {0}")]
    BadConfig(String),
}

/// One context window, addressed in token coordinates of the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingWindow {
    /// Requested token count; the text holds exactly this many tokens.
    pub size: usize,
    pub token_start: usize,
    pub text: String,
}

/// The fixed query plus its nested windows, smallest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingWindowSet {
    pub seed: u64,
    /// Contiguous token span inside the base (smallest) window.
    pub query: String,
    pub query_token_start: usize,
    pub windows: Vec<ScalingWindow>,
}

fn slice_tokens(text: &str, spans: &[(usize, usize)], start: usize, len: usize) -> String {
    text[spans[start].0..spans[start + len - 1].1].to_string()
}

/// Carve nested windows of `sizes` tokens out of `text`, placed by `seed`.
///
/// The base window lands at a seeded position; each larger window keeps the
/// previous one and grows past its end, wrapping growth to before the start
/// once the document's tail is exhausted. The query is a seeded
/// `query_len`-token span of the base window.
pub fn build_scaling_windows(
    text: &str,
    query_len: usize,
    sizes: &[usize],
    seed: u64,
) -> Result<ScalingWindowSet, ScalingError> {
    let base = *sizes
        .first()
        .ok_or_else(|| ScalingError::BadConfig("no window sizes given".into()))?;
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScalingError::BadConfig(
            "window sizes must be strictly increasing".into(),
        ));
    }
    if query_len == 0 || query_len > base {
        return Err(ScalingError::BadConfig(format!(
            "query length {query_len} must be between 1 and the base window size {base}"
        )));
    }

    let spans = tokenize_spans(text);
    let total = spans.len();
    let largest = *sizes.last().expect("nonempty checked above");
    if total < largest {
        return Err(ScalingError::TooShort {
            required: largest,
            available: total,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_start = rng.random_range(0..=total - base);
    let query_offset = rng.random_range(0..=base - query_len);
    let query_token_start = base_start + query_offset;

    let mut windows = Vec::with_capacity(sizes.len());
    let mut start = base_start;
    let mut end = base_start + base;
    for &size in sizes {
        let needed = size - (end - start);
        let grow_after = needed.min(total - end);
        end += grow_after;
        start -= needed - grow_after;
        windows.push(ScalingWindow {
            size,
            token_start: start,
            text: slice_tokens(text, &spans, start, size),
        });
    }

    Ok(ScalingWindowSet {
        seed,
        query: slice_tokens(text, &spans, query_token_start, query_len),
        query_token_start,
        windows,
    })
}

/// Wrap window text in a minimal standalone LaTeX document, ready for an
/// external render command to turn into a page image.
pub fn wrap_as_latex(body: &str) -> String {
    format!(
        "\\documentclass{{article}}\n\\pagestyle{{empty}}\n\\begin{{document}}\n{body}\n\\end{{document}}\n"
    )
}
