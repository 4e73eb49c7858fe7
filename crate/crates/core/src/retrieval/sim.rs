//! Unit-level similarity: cosine for single vectors, MaxSim late
//! interaction for row matrices.

use crate::embed::Embedding;
use crate::retrieval::RetrievalError;

/// Cosine over raw slices, normalizing on the fly. A zero vector on either
/// side scores 0 (it matches nothing and conflicts with nothing).
pub(crate) fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        dot += *x as f64 * *y as f64;
        na += (*x as f64).powi(2);
        nb += (*y as f64).powi(2);
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Cosine similarity between a query vector and a unit vector.
pub fn score_single(query: &[f32], unit: &[f32]) -> Result<f64, RetrievalError> {
    if query.len() != unit.len() {
        return Err(RetrievalError::DimensionMismatch {
            expected: query.len(),
            got: unit.len(),
        });
    }
    Ok(cosine(query, unit))
}

/// MaxSim over flat row-major matrices sharing `dim`: for each query row,
/// the max dot product over unit rows, summed. An empty unit matrix scores
/// negative infinity — the unit is unrankable.
pub(crate) fn maxsim_raw(query: &[f32], unit: &[f32], dim: usize) -> f64 {
    if unit.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0f64;
    for q_row in query.chunks_exact(dim) {
        let mut best = f64::NEG_INFINITY;
        for u_row in unit.chunks_exact(dim) {
            let dot: f64 = q_row
                .iter()
                .zip(u_row)
                .map(|(a, b)| *a as f64 * *b as f64)
                .sum();
            if dot > best {
                best = dot;
            }
        }
        total += best;
    }
    total
}

/// Late-interaction score between a query matrix and a unit matrix: the sum
/// over query rows of the max dot product against unit rows.
pub fn score_maxsim(query: &Embedding, unit: &Embedding) -> Result<f64, RetrievalError> {
    if unit.rows() > 0 && query.rows() > 0 && query.dim() != unit.dim() {
        return Err(RetrievalError::DimensionMismatch {
            expected: query.dim(),
            got: unit.dim(),
        });
    }
    Ok(maxsim_raw(query.data(), unit.data(), query.dim().max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<f32>>, dim: usize) -> Embedding {
        Embedding::from_rows(rows, dim).unwrap()
    }

    #[test]
    fn cosine_of_identical_vectors_is_one() {
        let v = [0.3f32, -0.7, 0.2];
        assert!((score_single(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_of_orthogonal_vectors_is_zero() {
        assert_eq!(score_single(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn cosine_normalizes_on_the_fly() {
        // (1,0) against the unit vector (0.6, 0.8): plain dot product 0.6,
        // and scaling either side must not change it.
        let s = score_single(&[1.0, 0.0], &[0.6, 0.8]).unwrap();
        assert!((s - 0.6).abs() < 1e-7);
        let s = score_single(&[10.0, 0.0], &[1.2, 1.6]).unwrap();
        assert!((s - 0.6).abs() < 1e-7);
    }

    #[test]
    fn zero_vector_scores_zero() {
        assert_eq!(score_single(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(score_single(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(score_single(&[1.0], &[1.0, 0.0]).is_err());
        let q = m(vec![vec![1.0, 0.0]], 2);
        let u = m(vec![vec![1.0, 0.0, 0.0]], 3);
        assert!(score_maxsim(&q, &u).is_err());
    }

    #[test]
    fn maxsim_identity_rows() {
        let q = m(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 2);
        assert!((score_maxsim(&q, &q).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn maxsim_takes_the_best_unit_row_per_query_row() {
        let q = m(vec![vec![1.0, 0.0]], 2);
        let u = m(vec![vec![0.0, 1.0], vec![0.6, 0.8]], 2);
        assert!((score_maxsim(&q, &u).unwrap() - 0.6).abs() < 1e-6);
    }

    #[test]
    fn empty_unit_matrix_is_unrankable() {
        let q = m(vec![vec![1.0, 0.0]], 2);
        let u = Embedding::empty(2);
        assert_eq!(score_maxsim(&q, &u).unwrap(), f64::NEG_INFINITY);
    }

    fn brute_force_maxsim(q: &[Vec<f32>], u: &[Vec<f32>]) -> f64 {
        let mut total = 0.0f64;
        for qr in q {
            let mut best = f64::NEG_INFINITY;
            for ur in u {
                let mut dot = 0.0f64;
                for i in 0..qr.len() {
                    dot += qr[i] as f64 * ur[i] as f64;
                }
                if dot > best {
                    best = dot;
                }
            }
            total += best;
        }
        total
    }

    proptest! {
        #[test]
        fn matches_brute_force_oracle(
            q in proptest::collection::vec(
                proptest::collection::vec(-2.0f32..2.0, 8), 1..10),
            u in proptest::collection::vec(
                proptest::collection::vec(-2.0f32..2.0, 8), 1..16),
        ) {
            let qm = m(q.clone(), 8);
            let um = m(u.clone(), 8);
            let fast = score_maxsim(&qm, &um).unwrap();
            let slow = brute_force_maxsim(&q, &u);
            prop_assert!((fast - slow).abs() < 1e-6);
        }

        // Adding rows to the unit matrix never lowers MaxSim.
        #[test]
        fn adding_unit_rows_never_lowers_score(
            q in proptest::collection::vec(
                proptest::collection::vec(-2.0f32..2.0, 4), 1..5),
            u in proptest::collection::vec(
                proptest::collection::vec(-2.0f32..2.0, 4), 1..6),
            extra in proptest::collection::vec(
                proptest::collection::vec(-2.0f32..2.0, 4), 1..4),
        ) {
            let qm = m(q, 4);
            let base = score_maxsim(&qm, &m(u.clone(), 4)).unwrap();
            let mut bigger = u;
            bigger.extend(extra);
            let grown = score_maxsim(&qm, &m(bigger, 4)).unwrap();
            prop_assert!(grown >= base - 1e-9);
        }
    }
}
