//! Query scoring against a vector index: cosine similarity for
//! single-vector providers, late-interaction MaxSim for multi-vector ones,
//! document-level max aggregation, and a BM25 lexical baseline.

mod bm25;
mod sim;

pub use bm25::{bm25_search, Bm25Index, Bm25Params};
pub use sim::{score_maxsim, score_single};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{Embedding, VectorMode};
use crate::index::VectorIndex;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("query dimension {got} does not match index dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("query with {query_rows} rows cannot score a {index_mode} index")]
    ModeMismatch {
        index_mode: VectorMode,
        query_rows: usize,
    },
}

/// One ranked document. `best_unit_id` is the unit that achieved the
/// document's score (first in document order on ties); `None` for a
/// document with no units, which carries the unrankable sentinel score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_unit_id: Option<String>,
}

/// Rank documents for a query: each document scores the max over its units
/// under the index's scoring mode, then the top `k` are returned sorted by
/// score descending with ties broken by doc_id ascending.
///
/// Every manifest document appears in the ranking when `k` covers the
/// corpus; documents with no units score negative infinity and sort last.
pub fn doc_scores(
    query: &Embedding,
    index: &VectorIndex,
    k: usize,
) -> Result<Vec<ScoredDoc>, RetrievalError> {
    if query.dim() != index.dim() {
        return Err(RetrievalError::DimensionMismatch {
            expected: index.dim(),
            got: query.dim(),
        });
    }
    if index.vector_mode() == VectorMode::Single && query.rows() != 1 {
        return Err(RetrievalError::ModeMismatch {
            index_mode: index.vector_mode(),
            query_rows: query.rows(),
        });
    }

    let mut best: std::collections::BTreeMap<&str, (f64, Option<&str>)> = index
        .manifest()
        .doc_ids
        .iter()
        .map(|id| (id.as_str(), (f64::NEG_INFINITY, None)))
        .collect();

    for (entry, rows) in index.iter_units() {
        let score = if entry.rows == 0 {
            f64::NEG_INFINITY
        } else {
            match index.vector_mode() {
                VectorMode::Single => sim::cosine(query.row(0), &rows[..index.dim()]),
                VectorMode::Multi => sim::maxsim_raw(query.data(), rows, index.dim()),
            }
        };
        let slot = best
            .entry(entry.doc_id.as_str())
            .or_insert((f64::NEG_INFINITY, None));
        // Strictly greater keeps the first unit in document order on ties.
        if score > slot.0 || slot.1.is_none() && score == slot.0 && score != f64::NEG_INFINITY {
            *slot = (score, Some(entry.unit_id.as_str()));
        }
    }

    let mut ranked: Vec<ScoredDoc> = best
        .into_iter()
        .map(|(doc_id, (score, unit))| ScoredDoc {
            doc_id: doc_id.to_string(),
            score,
            best_unit_id: unit.map(str::to_string),
        })
        .collect();
    sort_ranked(&mut ranked);
    ranked.truncate(k);
    Ok(ranked)
}

/// The shared ordering rule: score descending, doc_id ascending on ties.
pub(crate) fn sort_ranked(ranked: &mut [ScoredDoc]) {
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
}

/// 1-based rank of a document in a ranking, if present.
pub fn rank_of(ranked: &[ScoredDoc], doc_id: &str) -> Option<usize> {
    ranked
        .iter()
        .position(|d| d.doc_id == doc_id)
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{Modality, Precision, ProviderDescriptor, UnitEmbedding};
    use crate::index::IndexManifest;
    use crate::repr::RepresentationKind;
    use proptest::prelude::*;

    fn build_index(mode: VectorMode, dim: usize, units: Vec<(&str, &str, Vec<Vec<f32>>)>) -> VectorIndex {
        let mut doc_ids: Vec<String> = units.iter().map(|(d, _, _)| d.to_string()).collect();
        doc_ids.sort();
        doc_ids.dedup();
        let manifest = IndexManifest::new(
            RepresentationKind::TextOnly,
            ProviderDescriptor {
                name: "fixture".into(),
                modality: Modality::Text,
                vector_mode: mode,
                dimension: dim,
                normalizes: false,
                max_pixels: None,
                patch_size: None,
            },
            512,
            0,
            None,
            Precision::F32,
            doc_ids,
        );
        let embeddings: Vec<UnitEmbedding> = units
            .into_iter()
            .map(|(doc, unit, rows)| UnitEmbedding {
                doc_id: doc.into(),
                unit_id: unit.into(),
                vectors: Embedding::from_rows(rows, dim).unwrap(),
                precision: Precision::F32,
            })
            .collect();
        VectorIndex::build(manifest, &embeddings).unwrap()
    }

    /// 2-d unit vector with the given x component.
    fn unit2(x: f32) -> Vec<f32> {
        vec![x, (1.0 - x * x).sqrt()]
    }

    #[test]
    fn document_takes_max_over_units() {
        // Unit cosines against query (1,0): 0.2, 0.9, 0.4.
        let index = build_index(
            VectorMode::Single,
            2,
            vec![
                ("d1", "u0", vec![unit2(0.2)]),
                ("d1", "u1", vec![unit2(0.9)]),
                ("d1", "u2", vec![unit2(0.4)]),
            ],
        );
        let query = Embedding::single(vec![1.0, 0.0]);
        let ranked = doc_scores(&query, &index, 10).unwrap();
        assert_eq!(ranked.len(), 1);
        assert!((ranked[0].score - 0.9).abs() < 1e-6);
        assert_eq!(ranked[0].best_unit_id.as_deref(), Some("u1"));
    }

    #[test]
    fn single_unit_docs_rank_like_their_units() {
        let index = build_index(
            VectorMode::Single,
            2,
            vec![
                ("a", "u", vec![vec![0.5, 0.5]]),
                ("b", "u", vec![vec![1.0, 0.0]]),
                ("c", "u", vec![vec![0.0, 1.0]]),
            ],
        );
        let query = Embedding::single(vec![1.0, 0.0]);
        let ranked = doc_scores(&query, &index, 10).unwrap();
        let ids: Vec<&str> = ranked.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a", "c"]);
    }

    #[test]
    fn ties_break_by_doc_id_ascending() {
        let index = build_index(
            VectorMode::Single,
            2,
            vec![
                ("zeta", "u", vec![vec![1.0, 0.0]]),
                ("alpha", "u", vec![vec![2.0, 0.0]]), // same cosine as zeta
                ("mid", "u", vec![vec![0.0, 1.0]]),
            ],
        );
        let query = Embedding::single(vec![1.0, 0.0]);
        let ranked = doc_scores(&query, &index, 10).unwrap();
        let ids: Vec<&str> = ranked.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, vec!["alpha", "zeta", "mid"]);
    }

    #[test]
    fn unit_tie_keeps_first_in_document_order() {
        let index = build_index(
            VectorMode::Single,
            2,
            vec![
                ("d", "u0", vec![vec![3.0, 0.0]]),
                ("d", "u1", vec![vec![5.0, 0.0]]), // same cosine (1.0)
            ],
        );
        let query = Embedding::single(vec![1.0, 0.0]);
        let ranked = doc_scores(&query, &index, 1).unwrap();
        assert_eq!(ranked[0].best_unit_id.as_deref(), Some("u0"));
    }

    #[test]
    fn docs_without_units_rank_last_with_sentinel() {
        let mut index = build_index(
            VectorMode::Multi,
            2,
            vec![
                ("has-units", "u", vec![vec![1.0, 0.0]]),
                ("zz-empty", "u", vec![]),
            ],
        );
        let query = Embedding::from_rows(vec![vec![1.0, 0.0]], 2).unwrap();
        let ranked = doc_scores(&query, &index, 10).unwrap();
        assert_eq!(ranked.len(), 2);
        assert_eq!(ranked[1].doc_id, "zz-empty");
        assert_eq!(ranked[1].score, f64::NEG_INFINITY);
        assert_eq!(ranked[1].best_unit_id, None);
        index = build_index(VectorMode::Multi, 2, vec![("only", "u", vec![vec![1.0, 0.0]])]);
        assert_eq!(doc_scores(&query, &index, 0).unwrap().len(), 0);
    }

    #[test]
    fn mode_and_dimension_mismatches_error() {
        let index = build_index(VectorMode::Single, 2, vec![("d", "u", vec![vec![1.0, 0.0]])]);
        let multi_query = Embedding::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        assert!(matches!(
            doc_scores(&multi_query, &index, 5),
            Err(RetrievalError::ModeMismatch { .. })
        ));
        let wrong_dim = Embedding::single(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            doc_scores(&wrong_dim, &index, 5),
            Err(RetrievalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grouped_scan_equals_exhaustive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let dim = 4;
        let mut units = Vec::new();
        for doc in 0..12 {
            let n_units = rng.random_range(1..5);
            for u in 0..n_units {
                let rows: Vec<Vec<f32>> = (0..rng.random_range(1..4))
                    .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect();
                units.push((format!("doc-{doc:02}"), format!("unit-{u:05}"), rows));
            }
        }
        let borrowed: Vec<(&str, &str, Vec<Vec<f32>>)> = units
            .iter()
            .map(|(d, u, r)| (d.as_str(), u.as_str(), r.clone()))
            .collect();
        let index = build_index(VectorMode::Multi, dim, borrowed);
        let query = Embedding::from_rows(
            (0..3)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            dim,
        )
        .unwrap();

        // Oracle: score every unit independently, then group-by max.
        let mut oracle: std::collections::BTreeMap<String, f64> = Default::default();
        for (entry, rows) in index.iter_units() {
            let s = score_maxsim(
                &query,
                &Embedding::from_rows(
                    rows.chunks(dim).map(|c| c.to_vec()).collect(),
                    dim,
                )
                .unwrap(),
            )
            .unwrap();
            let slot = oracle.entry(entry.doc_id.clone()).or_insert(f64::NEG_INFINITY);
            if s > *slot {
                *slot = s;
            }
        }

        for k in [1, 3, 12, 100] {
            let ranked = doc_scores(&query, &index, k).unwrap();
            assert_eq!(ranked.len(), k.min(12));
            for doc in &ranked {
                assert!((doc.score - oracle[&doc.doc_id]).abs() < 1e-9);
            }
        }
    }

    proptest! {
        // Scaling every unit vector of every document by one positive
        // scalar rescales all MaxSim scores uniformly, leaving the ranking
        // unchanged.
        #[test]
        fn maxsim_ranking_invariant_under_global_scaling(
            scale in 0.1f32..10.0,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dim = 3;
            let units: Vec<(String, Vec<Vec<f32>>)> = (0..6)
                .map(|d| {
                    let rows: Vec<Vec<f32>> = (0..2)
                        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
                        .collect();
                    (format!("doc-{d}"), rows)
                })
                .collect();
            let plain: Vec<(&str, &str, Vec<Vec<f32>>)> = units
                .iter()
                .map(|(d, r)| (d.as_str(), "u", r.clone()))
                .collect();
            let scaled: Vec<(&str, &str, Vec<Vec<f32>>)> = units
                .iter()
                .map(|(d, r)| {
                    (
                        d.as_str(),
                        "u",
                        r.iter()
                            .map(|row| row.iter().map(|x| x * scale).collect())
                            .collect(),
                    )
                })
                .collect();
            let query = Embedding::from_rows(
                (0..2)
                    .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
                    .collect(),
                dim,
            )
            .unwrap();
            let a = doc_scores(&query, &build_index(VectorMode::Multi, dim, plain), 10).unwrap();
            let b = doc_scores(&query, &build_index(VectorMode::Multi, dim, scaled), 10).unwrap();
            let order_a: Vec<&str> = a.iter().map(|d| d.doc_id.as_str()).collect();
            let order_b: Vec<&str> = b.iter().map(|d| d.doc_id.as_str()).collect();
            prop_assert_eq!(order_a, order_b);
        }

        // Cosine is exactly invariant to positive per-vector scaling.
        #[test]
        fn cosine_invariant_under_per_vector_scaling(
            x in -5.0f32..5.0,
            y in -5.0f32..5.0,
            s in 0.5f32..4.0,
        ) {
            prop_assume!(x.abs() > 0.01 || y.abs() > 0.01);
            let q = vec![1.0f32, 0.5];
            let a = score_single(&q, &[x, y]).unwrap();
            let b = score_single(&q, &[x * s, y * s]).unwrap();
            prop_assert!((a - b).abs() < 1e-5);
        }

        // Total order: with k = corpus size every document appears once.
        #[test]
        fn full_k_is_a_total_order(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let docs = 8;
            let units: Vec<(String, Vec<Vec<f32>>)> = (0..docs)
                .map(|d| {
                    (
                        format!("doc-{d}"),
                        vec![(0..2).map(|_| rng.random_range(-1.0f32..1.0)).collect()],
                    )
                })
                .collect();
            let plain: Vec<(&str, &str, Vec<Vec<f32>>)> = units
                .iter()
                .map(|(d, r)| (d.as_str(), "u", r.clone()))
                .collect();
            let index = build_index(VectorMode::Single, 2, plain);
            let query = Embedding::single(vec![rng.random_range(-1.0f32..1.0), 1.0]);
            let ranked = doc_scores(&query, &index, docs).unwrap();
            let mut ids: Vec<&str> = ranked.iter().map(|d| d.doc_id.as_str()).collect();
            prop_assert_eq!(ids.len(), docs);
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), docs);
        }
    }
}
