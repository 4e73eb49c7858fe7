//! Benchmark query construction: generation from document evidence,
//! decontextualization into open-domain form, lexical difficulty filtering,
//! and LLM verification, with per-stage accounting.

mod jsonl;
mod llm;
mod pipeline;
pub mod prompts;

pub use jsonl::{read_queries, write_queries, QueryFileError};
pub use llm::{HttpLlmService, LlmError, LlmService};
pub use pipeline::{
    decontextualize, difficulty_filter, generate_queries, naturalize, verify_queries,
    Decontextualized, FilterOutcome, GenerationOutcome, PipelineError, VerifyOutcome,
    DEFAULT_DIFFICULTY_CUTOFF,
};

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What kind of document evidence a query is grounded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvidenceType {
    Text,
    Table,
    Figure,
}

impl EvidenceType {
    pub const ALL: [EvidenceType; 3] = [Self::Text, Self::Table, Self::Figure];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Text => "text",
            Self::Table => "table",
            Self::Figure => "figure",
        }
    }
}

impl std::fmt::Display for EvidenceType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvidenceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "table" => Ok(Self::Table),
            "figure" => Ok(Self::Figure),
            other => Err(format!(
                "unknown evidence type `{other}` (expected text, table, or figure)"
            )),
        }
    }
}

/// Pipeline position. Ordered: a query only ever moves to a later stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryStage {
    Generated,
    Decontextualized,
    Filtered,
    Verified,
    Final,
}

impl QueryStage {
    pub const ALL: [QueryStage; 5] = [
        Self::Generated,
        Self::Decontextualized,
        Self::Filtered,
        Self::Verified,
        Self::Final,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Generated => "generated",
            Self::Decontextualized => "decontextualized",
            Self::Filtered => "filtered",
            Self::Verified => "verified",
            Self::Final => "final",
        }
    }
}

impl std::fmt::Display for QueryStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("query {query_id} cannot move backward from {from} to {to}")]
pub struct StageError {
    pub query_id: String,
    pub from: QueryStage,
    pub to: QueryStage,
}

/// The structured validator verdict for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub is_valid: bool,
    pub score: i64,
    pub decision_rationale: String,
    pub confidence: i64,
}

/// Audit trail carried through the pipeline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryAudit {
    /// Text before decontextualization rewrote it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_text: Option<String>,
    /// The rewriter's one-sentence rationale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decontext_rationale: Option<String>,
    /// Deictic phrasing ("this figure", ...) survived rewriting; the
    /// verification stage should scrutinize this query.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub deictic_flag: bool,
    /// Gold document's BM25 rank recorded by the difficulty filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bm25_gold_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

/// One benchmark query with exactly one gold document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub text: String,
    pub evidence_type: EvidenceType,
    pub gold_doc_id: String,
    pub stage: QueryStage,
    #[serde(default)]
    pub audit: QueryAudit,
}

impl Query {
    pub fn new(
        query_id: impl Into<String>,
        text: impl Into<String>,
        evidence_type: EvidenceType,
        gold_doc_id: impl Into<String>,
        stage: QueryStage,
    ) -> Self {
        Self {
            query_id: query_id.into(),
            text: text.into(),
            evidence_type,
            gold_doc_id: gold_doc_id.into(),
            stage,
            audit: QueryAudit::default(),
        }
    }

    /// Move to a later stage; moving backward (or standing still) is an
    /// error.
    pub fn advance(&mut self, to: QueryStage) -> Result<(), StageError> {
        if to <= self.stage {
            return Err(StageError {
                query_id: self.query_id.clone(),
                from: self.stage,
                to,
            });
        }
        self.stage = to;
        Ok(())
    }
}

#[derive(Debug, Error)]
#[error("stage {later} has more {evidence} queries ({later_count}) than earlier stage {earlier} ({earlier_count})")]
pub struct StatsError {
    pub earlier: QueryStage,
    pub later: QueryStage,
    pub evidence: EvidenceType,
    pub earlier_count: usize,
    pub later_count: usize,
}

/// How many queries of each evidence type survived each stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    counts: BTreeMap<QueryStage, BTreeMap<EvidenceType, usize>>,
}

impl PipelineStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, stage: QueryStage, evidence: EvidenceType, count: usize) {
        *self
            .counts
            .entry(stage)
            .or_default()
            .entry(evidence)
            .or_default() = count;
    }

    /// Record the surviving population at a stage from the queries
    /// themselves.
    pub fn tally(&mut self, stage: QueryStage, queries: &[Query]) {
        let entry = self.counts.entry(stage).or_default();
        for evidence in EvidenceType::ALL {
            let count = queries
                .iter()
                .filter(|q| q.evidence_type == evidence)
                .count();
            entry.insert(evidence, count);
        }
    }

    pub fn get(&self, stage: QueryStage, evidence: EvidenceType) -> usize {
        self.counts
            .get(&stage)
            .and_then(|m| m.get(&evidence))
            .copied()
            .unwrap_or(0)
    }

    pub fn stages(&self) -> impl Iterator<Item = QueryStage> + '_ {
        self.counts.keys().copied()
    }

    /// Check the counts only ever shrink from stage to stage.
    pub fn validate_monotone(&self) -> Result<(), StatsError> {
        let stages: Vec<QueryStage> = self.counts.keys().copied().collect();
        for pair in stages.windows(2) {
            for evidence in EvidenceType::ALL {
                let earlier = self.get(pair[0], evidence);
                let later = self.get(pair[1], evidence);
                if later > earlier {
                    return Err(StatsError {
                        earlier: pair[0],
                        later: pair[1],
                        evidence,
                        earlier_count: earlier,
                        later_count: later,
                    });
                }
            }
        }
        Ok(())
    }
}
