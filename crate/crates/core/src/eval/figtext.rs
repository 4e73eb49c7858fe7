//! Why do figure queries land on text chunks? For a retrieved chunk and a
//! gold figure, measure three things: is the chunk physically near the
//! figure, does it cite a figure, and does it restate the caption's
//! informative words.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::stopwords::{content_words, words};
use crate::repr::Chunk;

pub const DEFAULT_PROXIMITY_WINDOW: usize = 2;
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.3;

/// Knobs for [`figure_text_diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureTextParams {
    /// A chunk within this many positions of the figure's chunk is "near".
    pub proximity_window: usize,
    /// Caption-overlap ratio at or above this means the chunk carries the
    /// caption's information.
    pub overlap_threshold: f64,
}

impl Default for FigureTextParams {
    fn default() -> Self {
        Self {
            proximity_window: DEFAULT_PROXIMITY_WINDOW,
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
        }
    }
}

/// Diagnostics for one (chunk, figure) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureTextDiagnostics {
    pub chunk_index: usize,
    /// Index of the chunk holding the figure's anchor; `None` when the
    /// document has no chunks to anchor into.
    pub figure_chunk_index: Option<usize>,
    pub near_figure: bool,
    pub references_figure: bool,
    /// Share of the caption's content words present in the chunk; 0 when
    /// the caption has none.
    pub overlap_ratio: f64,
    pub contains_caption_info: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

static FIGURE_REFERENCE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bfig\.|\bfigure\s+\d|\\ref\{fig").expect("figure reference pattern compiles")
});

/// Does this text cite a figure ("Fig. 3", "Figure 2", `\ref{fig:...}`)?
pub fn references_figure(text: &str) -> bool {
    FIGURE_REFERENCE.is_match(text)
}

/// Index of the chunk whose span holds byte offset `anchor`; anchors past
/// the last chunk land on it.
pub fn chunk_index_of_anchor(chunks: &[Chunk], anchor: usize) -> Option<usize> {
    if chunks.is_empty() {
        return None;
    }
    Some(
        chunks
            .iter()
            .position(|c| anchor >= c.start && anchor < c.end)
            .unwrap_or(chunks.len() - 1),
    )
}

/// Fraction of `caption`'s content words that appear in `chunk_text`.
/// `None` when the caption has no content words at all.
pub fn caption_overlap_ratio(caption: &str, chunk_text: &str) -> Option<f64> {
    let caption_words = content_words(caption);
    if caption_words.is_empty() {
        return None;
    }
    let chunk_words = words(chunk_text);
    let shared = caption_words.intersection(&chunk_words).count();
    Some(shared as f64 / caption_words.len() as f64)
}

/// Diagnose one retrieved chunk against a figure it was supposed to stand
/// in for. `chunks` are the document's chunks in order (used to place the
/// figure's `anchor`); `caption` may be absent or empty, in which case the
/// overlap flag is false and a note says why.
pub fn figure_text_diagnostics(
    chunk: &Chunk,
    chunks: &[Chunk],
    anchor: usize,
    caption: Option<&str>,
    params: &FigureTextParams,
) -> FigureTextDiagnostics {
    let figure_chunk_index = chunk_index_of_anchor(chunks, anchor);
    let near_figure = figure_chunk_index
        .is_some_and(|fi| chunk.index.abs_diff(fi) <= params.proximity_window);
    let refs = references_figure(&chunk.text);

    let (overlap_ratio, contains, note) = match caption {
        Some(text) => match caption_overlap_ratio(text, &chunk.text) {
            Some(ratio) => (ratio, ratio >= params.overlap_threshold, None),
            None => (
                0.0,
                false,
                Some("caption has no content words; overlap undefined".to_string()),
            ),
        },
        None => (
            0.0,
            false,
            Some("figure has no caption; overlap undefined".to_string()),
        ),
    };

    FigureTextDiagnostics {
        chunk_index: chunk.index,
        figure_chunk_index,
        near_figure,
        references_figure: refs,
        overlap_ratio,
        contains_caption_info: contains,
        note,
    }
}

/// Aggregate rates over many diagnosed pairs, one row of a comparison
/// table (e.g. correctly- vs incorrectly-retrieved cases).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureTextSummary {
    pub cases: usize,
    pub near_figure_rate: f64,
    pub references_figure_rate: f64,
    pub contains_caption_info_rate: f64,
    pub mean_overlap_ratio: f64,
}

pub fn summarize_figure_text(diags: &[FigureTextDiagnostics]) -> FigureTextSummary {
    let cases = diags.len();
    let rate = |pred: fn(&FigureTextDiagnostics) -> bool| {
        if cases == 0 {
            0.0
        } else {
            diags.iter().filter(|d| pred(d)).count() as f64 / cases as f64
        }
    };
    FigureTextSummary {
        cases,
        near_figure_rate: rate(|d| d.near_figure),
        references_figure_rate: rate(|d| d.references_figure),
        contains_caption_info_rate: rate(|d| d.contains_caption_info),
        mean_overlap_ratio: super::ndcg::mean(
            &diags.iter().map(|d| d.overlap_ratio).collect::<Vec<_>>(),
        ),
    }
}
