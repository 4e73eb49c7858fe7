//! `texrank filter-queries`: drop queries whose gold document a plain
//! lexical ranker already finds near the top.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use texrank_core::ingest::IngestOptions;
use texrank_core::query::{difficulty_filter, read_queries, write_queries, DEFAULT_DIFFICULTY_CUTOFF};
use texrank_core::repr::ChunkingConfig;
use texrank_core::retrieval::{Bm25Index, Bm25Params};

use crate::commands::emit_report;
use crate::config::{self, FileConfig};
use crate::corpus::{corpus_chunks, ingest_corpus};

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Query file, one JSON query per line.
    #[arg(long)]
    queries: PathBuf,
    /// Corpus directory the lexical ranker indexes.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// A gold rank at or above this cutoff marks the query too easy.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// Where to write the surviving queries.
    #[arg(long)]
    out_kept: PathBuf,
    /// Where to write the removed queries (with their lexical ranks).
    #[arg(long)]
    out_removed: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct FilterReport {
    input: usize,
    kept: usize,
    removed: usize,
    cutoff: usize,
}

pub fn run(args: FilterArgs, file: &FileConfig) -> Result<()> {
    let corpus = config::pick_opt(args.corpus, file.corpus.clone())
        .context("--corpus is required (flag or config)")?;
    let cutoff = config::pick(args.cutoff, file.cutoff, DEFAULT_DIFFICULTY_CUTOFF);
    let chunking = ChunkingConfig::new(
        config::pick(args.chunk_size, file.chunk_size, ChunkingConfig::default().chunk_size),
        config::pick(args.overlap, file.overlap, ChunkingConfig::default().overlap),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let queries = read_queries(&args.queries)
        .with_context(|| format!("reading queries {}", args.queries.display()))?;
    let mut options = IngestOptions::default();
    options.flatten.lenient = true;
    let corpus_data = ingest_corpus(&corpus, &options)?;
    let chunks = corpus_chunks(&corpus_data.docs, &chunking)?;
    let bm25 = Bm25Index::build(&chunks, Bm25Params::default())
        .map_err(|e| anyhow::anyhow!("building lexical index: {e}"))?;

    let outcome =
        difficulty_filter(&queries, &bm25, cutoff).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_queries(&args.out_kept, &outcome.kept)
        .with_context(|| format!("writing {}", args.out_kept.display()))?;
    if let Some(path) = &args.out_removed {
        write_queries(path, &outcome.removed)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    emit_report(
        &FilterReport {
            input: queries.len(),
            kept: outcome.kept.len(),
            removed: outcome.removed.len(),
            cutoff,
        },
        None,
    )
}
