//! Okapi BM25 over text chunks, aggregated to documents by max.
//!
//! Tokenization is lowercased whitespace splitting with no stemming, the
//! same segmentation the text representations use, so lexical difficulty
//! filtering sees the corpus exactly as a text index would.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::repr::{chunk_unit_id, Chunk};
use crate::retrieval::{sort_ranked, ScoredDoc};

#[derive(Debug, Error)]
pub enum Bm25Error {
    #[error("invalid BM25 parameters: k1 = {k1} must be ≥ 0 and b = {b} must be in [0, 1]")]
    InvalidParams { k1: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<(), Bm25Error> {
        if self.k1 >= 0.0 && (0.0..=1.0).contains(&self.b) {
            Ok(())
        } else {
            Err(Bm25Error::InvalidParams {
                k1: self.k1,
                b: self.b,
            })
        }
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.to_lowercase())
        .collect()
}

struct ChunkStats {
    doc_id: String,
    unit_id: String,
    len: usize,
    tf: BTreeMap<String, usize>,
}

/// A scored-ahead BM25 corpus: document frequencies and per-chunk term
/// counts, reusable across many queries.
pub struct Bm25Index {
    params: Bm25Params,
    chunks: Vec<ChunkStats>,
    df: BTreeMap<String, usize>,
    avg_len: f64,
    doc_ids: Vec<String>,
}

impl Bm25Index {
    pub fn build(chunks: &[Chunk], params: Bm25Params) -> Result<Self, Bm25Error> {
        params.validate()?;
        let mut stats = Vec::with_capacity(chunks.len());
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut total_len = 0usize;
        let mut doc_ids: Vec<String> = Vec::new();
        for chunk in chunks {
            let tokens = tokenize(&chunk.text);
            let mut tf: BTreeMap<String, usize> = BTreeMap::new();
            for token in &tokens {
                *tf.entry(token.clone()).or_default() += 1;
            }
            for term in tf.keys() {
                *df.entry(term.clone()).or_default() += 1;
            }
            total_len += tokens.len();
            if !doc_ids.contains(&chunk.doc_id) {
                doc_ids.push(chunk.doc_id.clone());
            }
            stats.push(ChunkStats {
                doc_id: chunk.doc_id.clone(),
                unit_id: chunk_unit_id(chunk.index),
                len: tokens.len(),
                tf,
            });
        }
        let avg_len = if stats.is_empty() {
            0.0
        } else {
            total_len as f64 / stats.len() as f64
        };
        Ok(Self {
            params,
            chunks: stats,
            df,
            avg_len,
            doc_ids,
        })
    }

    /// Number of chunks — the `N` in the idf formula.
    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.doc_ids.iter().any(|d| d == doc_id)
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.chunks.len() as f64;
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn chunk_score(&self, chunk: &ChunkStats, terms: &BTreeSet<String>) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let mut score = 0.0;
        for term in terms {
            let tf = chunk.tf.get(term).copied().unwrap_or(0) as f64;
            if tf == 0.0 {
                continue;
            }
            let len_norm = if self.avg_len > 0.0 {
                1.0 - b + b * chunk.len as f64 / self.avg_len
            } else {
                1.0
            };
            score += self.idf(term) * (tf * (k1 + 1.0)) / (tf + k1 * len_norm);
        }
        score
    }

    /// Rank every document: per-chunk Okapi scores reduced per document by
    /// max, sorted score-descending with doc_id tie-breaking, truncated to
    /// `k`. An empty query yields no results.
    pub fn search(&self, query: &str, k: usize) -> Vec<ScoredDoc> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        if terms.is_empty() {
            return Vec::new();
        }
        let mut best: BTreeMap<&str, (f64, &str)> = BTreeMap::new();
        for chunk in &self.chunks {
            let score = self.chunk_score(chunk, &terms);
            let slot = best
                .entry(chunk.doc_id.as_str())
                .or_insert((f64::NEG_INFINITY, ""));
            if score > slot.0 {
                *slot = (score, chunk.unit_id.as_str());
            }
        }
        let mut ranked: Vec<ScoredDoc> = best
            .into_iter()
            .map(|(doc_id, (score, unit))| ScoredDoc {
                doc_id: doc_id.to_string(),
                score,
                best_unit_id: Some(unit.to_string()),
            })
            .collect();
        sort_ranked(&mut ranked);
        ranked.truncate(k);
        ranked
    }
}

/// One-shot convenience: build the corpus statistics and run a single
/// query.
pub fn bm25_search(
    query: &str,
    chunks: &[Chunk],
    k: usize,
    params: Bm25Params,
) -> Result<Vec<ScoredDoc>, Bm25Error> {
    Ok(Bm25Index::build(chunks, params)?.search(query, k))
}
