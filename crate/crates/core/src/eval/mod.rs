//! Retrieval evaluation: score a query set against an index, aggregate
//! rank quality overall and per evidence type, and run the two follow-up
//! analyses (context-window scaling, figure-vs-text chunk diagnostics).

mod figtext;
mod ndcg;
mod scaling;
pub mod stopwords;

pub use figtext::{
    caption_overlap_ratio, chunk_index_of_anchor, figure_text_diagnostics, references_figure,
    summarize_figure_text, FigureTextDiagnostics, FigureTextParams, FigureTextSummary,
    DEFAULT_OVERLAP_THRESHOLD, DEFAULT_PROXIMITY_WINDOW,
};
pub use ndcg::{mean, ndcg_at_k, ndcg_from_rank};
pub use scaling::{
    build_scaling_windows, wrap_as_latex, ScalingError, ScalingWindow, ScalingWindowSet,
    DEFAULT_QUERY_TOKENS, DEFAULT_WINDOW_SIZES,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{EmbedInput, EmbeddingProvider, ProviderDescriptor, ProviderError};
use crate::index::{IndexManifest, VectorIndex};
use crate::query::{EvidenceType, Query};
use crate::retrieval::{doc_scores, rank_of, RetrievalError};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("query {query_id}: gold document `{gold_doc_id}` is not in the index")]
    GoldMissing {
        query_id: String,
        gold_doc_id: String,
    },
    #[error("query embedding failed: {0}")]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error("provider returned {got} embeddings for {expected} queries")]
    QueryCountMismatch { expected: usize, got: usize },
}

/// One evaluated query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query_id: String,
    pub evidence_type: EvidenceType,
    pub gold_doc_id: String,
    /// 1-based rank of the gold document; `None` if it never appeared.
    pub gold_rank: Option<usize>,
    pub ndcg: f64,
    /// What actually won the ranking.
    pub top_doc_id: Option<String>,
}

/// Mean rank quality for one slice of the query set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceAggregate {
    pub count: usize,
    pub mean_ndcg: f64,
}

/// Full evaluation output: per-query rows, aggregates, and enough
/// configuration echo to reproduce the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub provider: ProviderDescriptor,
    pub manifest: IndexManifest,
    pub index_size_bytes: u64,
    pub query_count: usize,
    pub mean_ndcg: f64,
    pub per_evidence: BTreeMap<EvidenceType, EvidenceAggregate>,
    pub per_query: Vec<QueryOutcome>,
}

/// Embed each query's text with `provider`, rank the index for it, and
/// score the gold document's rank at cutoff `k`.
pub fn evaluate(
    queries: &[Query],
    index: &VectorIndex,
    provider: &dyn EmbeddingProvider,
    k: usize,
) -> Result<EvalReport, EvalError> {
    for query in queries {
        if !index.manifest().doc_ids.contains(&query.gold_doc_id) {
            return Err(EvalError::GoldMissing {
                query_id: query.query_id.clone(),
                gold_doc_id: query.gold_doc_id.clone(),
            });
        }
    }

    let inputs: Vec<EmbedInput> = queries
        .iter()
        .map(|q| EmbedInput::text(q.text.clone()))
        .collect();
    let embeddings = if inputs.is_empty() {
        Vec::new()
    } else {
        provider.embed_batch(&inputs)?
    };
    if embeddings.len() != queries.len() {
        return Err(EvalError::QueryCountMismatch {
            expected: queries.len(),
            got: embeddings.len(),
        });
    }

    let doc_count = index.manifest().doc_ids.len();
    let mut per_query = Vec::with_capacity(queries.len());
    for (query, embedding) in queries.iter().zip(&embeddings) {
        let ranked = doc_scores(embedding, index, doc_count)?;
        let gold_rank = rank_of(&ranked, &query.gold_doc_id);
        per_query.push(QueryOutcome {
            query_id: query.query_id.clone(),
            evidence_type: query.evidence_type,
            gold_doc_id: query.gold_doc_id.clone(),
            gold_rank,
            ndcg: match gold_rank {
                Some(rank) => ndcg_from_rank(rank, k),
                None => 0.0,
            },
            top_doc_id: ranked.first().map(|d| d.doc_id.clone()),
        });
    }

    let all: Vec<f64> = per_query.iter().map(|q| q.ndcg).collect();
    let mut per_evidence = BTreeMap::new();
    for evidence in EvidenceType::ALL {
        let slice: Vec<f64> = per_query
            .iter()
            .filter(|q| q.evidence_type == evidence)
            .map(|q| q.ndcg)
            .collect();
        if !slice.is_empty() {
            per_evidence.insert(
                evidence,
                EvidenceAggregate {
                    count: slice.len(),
                    mean_ndcg: mean(&slice),
                },
            );
        }
    }

    Ok(EvalReport {
        k,
        provider: provider.descriptor().clone(),
        manifest: index.manifest().clone(),
        index_size_bytes: index.index_size_bytes(),
        query_count: queries.len(),
        mean_ndcg: mean(&all),
        per_evidence,
        per_query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_units, EmbedOptions, HashProvider, Precision};
    use crate::query::QueryStage;
    use crate::repr::{EmbeddingUnit, UnitKind};

    fn unit(doc_id: &str, unit_id: &str, text: &str) -> EmbeddingUnit {
        EmbeddingUnit {
            doc_id: doc_id.into(),
            unit_id: unit_id.into(),
            kind: UnitKind::TextChunk,
            text: Some(text.into()),
            images: Vec::new(),
        }
    }

    /// Three docs with disjoint vocabularies, hash-embedded.
    fn planted_index(provider: &HashProvider) -> VectorIndex {
        let units = vec![
            unit("apple", "chunk-00000", "malus domestica orchard cultivar"),
            unit("basalt", "chunk-00000", "igneous lava vesicular plagioclase"),
            unit("cicada", "chunk-00000", "brood emergence tymbal chorus"),
        ];
        let run = embed_units(&units, provider, &EmbedOptions::default()).unwrap();
        let manifest = IndexManifest::new(
            crate::repr::RepresentationKind::TextOnly,
            run.descriptor.clone(),
            512,
            0,
            None,
            Precision::F32,
            vec!["apple".into(), "basalt".into(), "cicada".into()],
        );
        VectorIndex::build(manifest, &run.embeddings).unwrap()
    }

    fn query(id: &str, text: &str, evidence: EvidenceType, gold: &str) -> Query {
        Query::new(id, text, evidence, gold, QueryStage::Final)
    }

    #[test]
    fn planted_queries_all_rank_first() {
        let provider = HashProvider::text_single(64);
        let index = planted_index(&provider);
        let queries = vec![
            query("q1", "malus domestica orchard", EvidenceType::Text, "apple"),
            query("q2", "igneous lava vesicular", EvidenceType::Figure, "basalt"),
            query("q3", "brood emergence tymbal", EvidenceType::Table, "cicada"),
        ];
        let report = evaluate(&queries, &index, &provider, DEFAULT_K).unwrap();
        assert_eq!(report.query_count, 3);
        assert!((report.mean_ndcg - 1.0).abs() < 1e-12);
        assert!(report
            .per_query
            .iter()
            .all(|q| q.gold_rank == Some(1) && q.top_doc_id.as_deref() == Some(&*q.gold_doc_id)));
        assert_eq!(report.index_size_bytes, index.index_size_bytes());
    }

    #[test]
    fn per_evidence_means_recompute_from_rows() {
        let provider = HashProvider::text_single(64);
        let index = planted_index(&provider);
        let queries = vec![
            query("q1", "malus domestica orchard", EvidenceType::Text, "apple"),
            // Wrong gold: "apple" text, gold says basalt → rank 2 or worse.
            query("q2", "malus domestica orchard", EvidenceType::Text, "basalt"),
            query("q3", "brood emergence tymbal", EvidenceType::Figure, "cicada"),
        ];
        let report = evaluate(&queries, &index, &provider, DEFAULT_K).unwrap();
        for (evidence, aggregate) in &report.per_evidence {
            let rows: Vec<f64> = report
                .per_query
                .iter()
                .filter(|q| q.evidence_type == *evidence)
                .map(|q| q.ndcg)
                .collect();
            assert_eq!(aggregate.count, rows.len());
            assert!((aggregate.mean_ndcg - mean(&rows)).abs() < 1e-12);
        }
        let overall: Vec<f64> = report.per_query.iter().map(|q| q.ndcg).collect();
        assert!((report.mean_ndcg - mean(&overall)).abs() < 1e-12);
        assert!(report.mean_ndcg < 1.0);
    }

    #[test]
    fn missing_gold_is_a_hard_error() {
        let provider = HashProvider::text_single(64);
        let index = planted_index(&provider);
        let queries = vec![query("q1", "whatever", EvidenceType::Text, "durian")];
        let err = evaluate(&queries, &index, &provider, DEFAULT_K).unwrap_err();
        match err {
            EvalError::GoldMissing { gold_doc_id, .. } => assert_eq!(gold_doc_id, "durian"),
            other => panic!("expected GoldMissing, got {other}"),
        }
    }

    #[test]
    fn empty_query_set_reports_zeroes() {
        let provider = HashProvider::text_single(64);
        let index = planted_index(&provider);
        let report = evaluate(&[], &index, &provider, DEFAULT_K).unwrap();
        assert_eq!(report.query_count, 0);
        assert_eq!(report.mean_ndcg, 0.0);
        assert!(report.per_evidence.is_empty());
    }

    #[test]
    fn report_serializes_with_string_keyed_maps() {
        let provider = HashProvider::text_single(32);
        let index = planted_index(&provider);
        let queries = vec![query("q1", "malus", EvidenceType::Table, "apple")];
        let report = evaluate(&queries, &index, &provider, DEFAULT_K).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"table\""));
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
