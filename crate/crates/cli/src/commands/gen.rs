//! `texrank gen-queries`: run the full query production pipeline against a
//! completion endpoint — generate, decontextualize, difficulty-filter,
//! verify, naturalize — and write the surviving queries.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use texrank_core::embed::FixtureMode;
use texrank_core::ingest::IngestOptions;
use texrank_core::query::{
    decontextualize, difficulty_filter, generate_queries, naturalize, verify_queries,
    write_queries, Decontextualized, EvidenceType, HttpLlmService, PipelineStats, QueryStage,
    DEFAULT_DIFFICULTY_CUTOFF,
};
use texrank_core::repr::ChunkingConfig;
use texrank_core::retrieval::{Bm25Index, Bm25Params};

use crate::commands::emit_report;
use crate::commands::index::resolve_fixtures;
use crate::config::{self, FileConfig};
use crate::corpus::{corpus_chunks, ingest_corpus};
use crate::provider;

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Corpus directory to draw evidence from.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Completion endpoint the pipeline prompts are sent to.
    #[arg(long)]
    provider_endpoint: Option<String>,
    /// Evidence types to generate for (repeatable); default all three.
    #[arg(long = "evidence")]
    evidence: Vec<EvidenceType>,
    /// A gold rank at or above this cutoff marks the query too easy.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// Fixture handling for the endpoint: off, record, or replay.
    #[arg(long)]
    fixtures: Option<FixtureMode>,
    #[arg(long)]
    fixtures_dir: Option<PathBuf>,
    /// Where to write the final queries, one JSON per line.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the stage statistics (default: stdout only).
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct GenReport {
    documents: usize,
    generated: usize,
    skipped_candidates: usize,
    rejected_rewrites: usize,
    removed_too_easy: usize,
    invalid: usize,
    manual_review: usize,
    written: usize,
    stats: PipelineStats,
}

pub fn run(args: GenArgs, file: &FileConfig) -> Result<()> {
    let corpus = config::pick_opt(args.corpus, file.corpus.clone())
        .context("--corpus is required (flag or config)")?;
    let endpoint = config::pick_opt(args.provider_endpoint, file.provider_endpoint.clone())
        .context("--provider-endpoint is required (flag or config)")?;
    let cutoff = config::pick(args.cutoff, file.cutoff, DEFAULT_DIFFICULTY_CUTOFF);
    let chunking = ChunkingConfig::new(
        config::pick(args.chunk_size, file.chunk_size, ChunkingConfig::default().chunk_size),
        config::pick(args.overlap, file.overlap, ChunkingConfig::default().overlap),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let evidence = if args.evidence.is_empty() {
        EvidenceType::ALL.to_vec()
    } else {
        args.evidence.clone()
    };

    let fixtures_dir = config::pick_opt(args.fixtures_dir, file.fixtures_dir.clone());
    let transport = provider::transport(resolve_fixtures(args.fixtures, file)?, fixtures_dir.as_deref())?;
    let service = HttpLlmService::new(endpoint, transport);

    let mut options = IngestOptions::default();
    options.flatten.lenient = true;
    let corpus_data = ingest_corpus(&corpus, &options)?;
    for failure in &corpus_data.failures {
        eprintln!("warning: skipping {}: {}", failure.doc_id, failure.error);
    }
    anyhow::ensure!(!corpus_data.docs.is_empty(), "no ingestable documents in corpus");

    let mut stats = PipelineStats::new();
    let mut generated = Vec::new();
    let mut skipped = 0;
    for doc in &corpus_data.docs {
        for &ev in &evidence {
            let outcome = generate_queries(doc, ev, &service)
                .map_err(|e| anyhow::anyhow!("generating for {}: {e}", doc.doc_id))?;
            skipped += outcome.skipped;
            for note in outcome.diagnostics.notes() {
                eprintln!("warning: {note}");
            }
            generated.extend(outcome.queries);
        }
    }
    stats.tally(QueryStage::Generated, &generated);

    let mut rewritten = Vec::new();
    let mut rejected = 0;
    for query in &generated {
        match decontextualize(query, &service)
            .map_err(|e| anyhow::anyhow!("rewriting {}: {e}", query.query_id))?
        {
            Decontextualized::Accepted(q) => rewritten.push(q),
            Decontextualized::Rejected { query, rationale } => {
                eprintln!("warning: rejected {}: {rationale}", query.query_id);
                rejected += 1;
            }
        }
    }
    stats.tally(QueryStage::Decontextualized, &rewritten);

    let chunks = corpus_chunks(&corpus_data.docs, &chunking)?;
    let bm25 = Bm25Index::build(&chunks, Bm25Params::default())
        .map_err(|e| anyhow::anyhow!("building lexical index: {e}"))?;
    let filtered = difficulty_filter(&rewritten, &bm25, cutoff).map_err(|e| anyhow::anyhow!("{e}"))?;
    stats.tally(QueryStage::Filtered, &filtered.kept);

    let verified = verify_queries(&filtered.kept, &service)
        .map_err(|e| anyhow::anyhow!("verification failed: {e}"))?;
    for note in verified.diagnostics.notes() {
        eprintln!("warning: {note}");
    }
    stats.tally(QueryStage::Verified, &verified.valid);

    let final_queries = naturalize(verified.valid.clone()).map_err(|e| anyhow::anyhow!("{e}"))?;
    stats.tally(QueryStage::Final, &final_queries);
    stats
        .validate_monotone()
        .map_err(|e| anyhow::anyhow!("stage counts inconsistent: {e}"))?;

    write_queries(&args.out, &final_queries)
        .with_context(|| format!("writing {}", args.out.display()))?;

    emit_report(
        &GenReport {
            documents: corpus_data.docs.len(),
            generated: generated.len(),
            skipped_candidates: skipped,
            rejected_rewrites: rejected,
            removed_too_easy: filtered.removed.len(),
            invalid: verified.invalid.len(),
            manual_review: verified.manual_review.len(),
            written: final_queries.len(),
            stats,
        },
        args.stats_out.as_deref(),
    )
}
