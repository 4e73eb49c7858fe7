//! The four query pipeline stages: generate, decontextualize, filter by
//! lexical difficulty, verify. Plus the pass-through naturalization hook.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use super::llm::parse_completion_json;
use super::{
    EvidenceType, LlmError, LlmService, Query, QueryStage, StageError, Verdict,
};
use crate::diag::Diagnostics;
use crate::ingest::IngestedDocument;
use crate::query::prompts;
use crate::retrieval::{rank_of, Bm25Index};

/// Queries whose gold document ranks at or above this by BM25 are too easy.
pub const DEFAULT_DIFFICULTY_CUTOFF: usize = 5;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("query {query_id}: gold document `{gold_doc_id}` is not in the ranking corpus")]
    GoldMissing {
        query_id: String,
        gold_doc_id: String,
    },
}

/// What generation produced for one document and evidence type.
#[derive(Debug)]
pub struct GenerationOutcome {
    pub queries: Vec<Query>,
    /// Evidence items the service declined (or answered unusably).
    pub skipped: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Deserialize)]
struct GeneratedWire {
    query: Option<String>,
}

#[derive(Deserialize)]
struct RewrittenWire {
    query: Option<String>,
    #[serde(default)]
    reasoning: Option<String>,
}

/// Ask the service for one candidate question about `payload`. `Ok(None)`
/// means the service declined or answered unusably; the caller counts it.
fn ask_generation(
    service: &dyn LlmService,
    payload: &str,
    context: &str,
    diagnostics: &mut Diagnostics,
) -> Result<Option<String>, PipelineError> {
    let vars = BTreeMap::from([("paper_text".to_string(), payload.to_string())]);
    let completion = service.complete(prompts::GENERATION.id, &vars)?;
    let value = match parse_completion_json(&completion) {
        Ok(v) => v,
        Err(e) => {
            diagnostics.note(format!("{context}: unparseable generation output ({e})"));
            return Ok(None);
        }
    };
    match serde_json::from_value::<GeneratedWire>(value) {
        Ok(GeneratedWire { query: Some(text) }) if !text.trim().is_empty() => {
            Ok(Some(text.trim().to_string()))
        }
        Ok(GeneratedWire { query: Some(_) }) => {
            diagnostics.note(format!("{context}: generation returned an empty question"));
            Ok(None)
        }
        Ok(GeneratedWire { query: None }) => Ok(None),
        Err(e) => {
            diagnostics.note(format!("{context}: generation output missing query field ({e})"));
            Ok(None)
        }
    }
}

/// Generate candidate queries for one document: one per table or captioned
/// figure, or a single one over the full text.
pub fn generate_queries(
    doc: &IngestedDocument,
    evidence: EvidenceType,
    service: &dyn LlmService,
) -> Result<GenerationOutcome, PipelineError> {
    let mut diagnostics = Diagnostics::new();
    // (stable per-document ordinal, prompt payload)
    let mut candidates: Vec<(usize, String)> = Vec::new();
    match evidence {
        EvidenceType::Text => candidates.push((0, doc.normalized.clone())),
        EvidenceType::Table => {
            for table in &doc.structure.tables {
                candidates.push((table.index, table.latex.clone()));
            }
        }
        EvidenceType::Figure => {
            for figure in &doc.structure.figures {
                match &figure.caption {
                    Some(caption) if !caption.trim().is_empty() => {
                        candidates.push((figure.index, caption.clone()));
                    }
                    _ => diagnostics.note(format!(
                        "{}: figure {} has no caption to generate from",
                        doc.doc_id, figure.index
                    )),
                }
            }
        }
    }

    let mut queries = Vec::new();
    let mut skipped = 0;
    for (ordinal, payload) in &candidates {
        let query_id = format!("{}-{evidence}-{ordinal:03}", doc.doc_id);
        match ask_generation(service, payload, &query_id, &mut diagnostics)? {
            Some(text) => queries.push(Query::new(
                query_id,
                text,
                evidence,
                doc.doc_id.clone(),
                QueryStage::Generated,
            )),
            None => skipped += 1,
        }
    }
    Ok(GenerationOutcome {
        queries,
        skipped,
        diagnostics,
    })
}

static DEICTIC: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?ix)
        \b(?:this|these|that|those)\s+(?:figure|plot|graph|table|panel|image|chart|diagram)s?\b
        | \b(?:the\s+)?(?:figure|plot|graph|table|panel|image)s?\s+(?:above|below)\b
        | \bshown\s+(?:above|below)\b",
    )
    .expect("deictic pattern compiles")
});

fn has_deictic_phrasing(text: &str) -> bool {
    DEICTIC.is_match(text)
}

/// Result of rewriting one query into open-domain form.
#[derive(Debug)]
pub enum Decontextualized {
    /// The rewrite succeeded; the query carries its audit trail. A rewrite
    /// that still leans on document-local phrasing is flagged for the
    /// verification stage rather than dropped here.
    Accepted(Query),
    /// The service could not produce a context-free rewrite.
    Rejected { query: Query, rationale: String },
}

/// Rewrite one generated query into a context-independent question.
pub fn decontextualize(
    query: &Query,
    service: &dyn LlmService,
) -> Result<Decontextualized, PipelineError> {
    if query.stage != QueryStage::Generated {
        return Err(StageError {
            query_id: query.query_id.clone(),
            from: query.stage,
            to: QueryStage::Decontextualized,
        }
        .into());
    }
    let vars = BTreeMap::from([("question".to_string(), query.text.clone())]);
    let completion = service.complete(prompts::DECONTEXTUALIZATION.id, &vars)?;
    let wire: Option<RewrittenWire> = parse_completion_json(&completion)
        .ok()
        .and_then(|v| serde_json::from_value(v).ok());
    let Some(wire) = wire else {
        return Ok(Decontextualized::Rejected {
            query: query.clone(),
            rationale: "unparseable rewriter output".to_string(),
        });
    };
    let rationale = wire.reasoning.unwrap_or_default();
    match wire.query {
        Some(text) if !text.trim().is_empty() => {
            let mut rewritten = query.clone();
            rewritten.audit.original_text = Some(query.text.clone());
            rewritten.text = text.trim().to_string();
            rewritten.audit.decontext_rationale = Some(rationale);
            rewritten.audit.deictic_flag = has_deictic_phrasing(&rewritten.text);
            rewritten.advance(QueryStage::Decontextualized)?;
            Ok(Decontextualized::Accepted(rewritten))
        }
        _ => Ok(Decontextualized::Rejected {
            query: query.clone(),
            rationale,
        }),
    }
}

/// The difficulty filter's exact partition of its input.
#[derive(Debug)]
pub struct FilterOutcome {
    /// Queries whose gold document was NOT lexically easy to find.
    pub kept: Vec<Query>,
    /// Queries answerable by trivial keyword match (gold rank ≤ cutoff).
    pub removed: Vec<Query>,
}

/// Drop queries a plain lexical ranker already answers: if the gold
/// document ranks within `cutoff` by BM25, the query is removed. Every
/// query's gold rank is recorded in its audit either way.
pub fn difficulty_filter(
    queries: &[Query],
    bm25: &Bm25Index,
    cutoff: usize,
) -> Result<FilterOutcome, PipelineError> {
    let total_docs = bm25.doc_ids().len();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for query in queries {
        if !bm25.contains_doc(&query.gold_doc_id) {
            return Err(PipelineError::GoldMissing {
                query_id: query.query_id.clone(),
                gold_doc_id: query.gold_doc_id.clone(),
            });
        }
        let ranking = bm25.search(&query.text, total_docs);
        let rank = rank_of(&ranking, &query.gold_doc_id);
        let mut query = query.clone();
        query.audit.bm25_gold_rank = rank;
        match rank {
            Some(r) if r <= cutoff => removed.push(query),
            _ => {
                query.advance(QueryStage::Filtered)?;
                kept.push(query);
            }
        }
    }
    Ok(FilterOutcome { kept, removed })
}

/// Verification results, bucketed by verdict.
#[derive(Debug)]
pub struct VerifyOutcome {
    pub valid: Vec<Query>,
    pub invalid: Vec<Query>,
    /// Verdicts that did not parse; the queries need a human decision.
    pub manual_review: Vec<Query>,
    pub diagnostics: Diagnostics,
}

/// Ask the validator service to judge each filtered query. A malformed
/// verdict parks the query for manual review instead of failing the run.
pub fn verify_queries(
    queries: &[Query],
    service: &dyn LlmService,
) -> Result<VerifyOutcome, PipelineError> {
    let mut outcome = VerifyOutcome {
        valid: Vec::new(),
        invalid: Vec::new(),
        manual_review: Vec::new(),
        diagnostics: Diagnostics::new(),
    };
    for query in queries {
        if query.stage != QueryStage::Filtered {
            return Err(StageError {
                query_id: query.query_id.clone(),
                from: query.stage,
                to: QueryStage::Verified,
            }
            .into());
        }
        let payload = serde_json::json!({
            "question": query.text,
            "evidence_type": query.evidence_type,
            "deictic_flagged": query.audit.deictic_flag,
        });
        let vars = BTreeMap::from([("payload".to_string(), payload.to_string())]);
        let completion = service.complete(prompts::VERIFICATION.id, &vars)?;
        let verdict: Option<Verdict> = parse_completion_json(&completion)
            .ok()
            .and_then(|v| serde_json::from_value(v).ok());
        let mut query = query.clone();
        match verdict {
            Some(verdict) => {
                let is_valid = verdict.is_valid;
                query.audit.verdict = Some(verdict);
                if is_valid {
                    query.advance(QueryStage::Verified)?;
                    outcome.valid.push(query);
                } else {
                    outcome.invalid.push(query);
                }
            }
            None => {
                outcome.diagnostics.note(format!(
                    "{}: unparseable verdict, parked for manual review",
                    query.query_id
                ));
                outcome.manual_review.push(query);
            }
        }
    }
    Ok(outcome)
}

/// Final phrasing pass. Currently the identity rewrite: it only advances
/// the stage, keeping the slot in the pipeline for a future styling model.
pub fn naturalize(queries: Vec<Query>) -> Result<Vec<Query>, PipelineError> {
    let mut out = Vec::with_capacity(queries.len());
    for mut query in queries {
        query.advance(QueryStage::Final)?;
        out.push(query);
    }
    Ok(out)
}
