//! `texrank search`: rank the indexed corpus for one query string.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use texrank_core::embed::{EmbedInput, FixtureMode};
use texrank_core::eval::DEFAULT_K;
use texrank_core::index::VectorIndex;
use texrank_core::retrieval::doc_scores;
use texrank_core::ScoredDoc;

use crate::commands::emit_report;
use crate::commands::index::resolve_fixtures;
use crate::config::{self, FileConfig};
use crate::provider::{self, ProviderSpec, DEFAULT_HASH_DIM};

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Index file written by `texrank index`.
    #[arg(long)]
    index: PathBuf,
    /// Query text.
    #[arg(long)]
    query: String,
    /// How many documents to return.
    #[arg(long)]
    k: Option<usize>,
    /// Remote embedding endpoint; omit to use the built-in provider
    /// matching the index's descriptor.
    #[arg(long)]
    provider_endpoint: Option<String>,
    #[arg(long)]
    fixtures: Option<FixtureMode>,
    #[arg(long)]
    fixtures_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Hit {
    rank: usize,
    #[serde(flatten)]
    doc: ScoredDoc,
}

#[derive(Debug, Serialize)]
struct SearchReport {
    query: String,
    k: usize,
    hits: Vec<Hit>,
}

pub fn run(args: SearchArgs, file: &FileConfig) -> Result<()> {
    let index = VectorIndex::read_from(&args.index)
        .with_context(|| format!("reading index {}", args.index.display()))?;
    let k = config::pick(args.k, file.k, DEFAULT_K);

    let endpoint = config::pick_opt(args.provider_endpoint, file.provider_endpoint.clone());
    let fixtures_dir = config::pick_opt(args.fixtures_dir, file.fixtures_dir.clone());
    let spec = ProviderSpec {
        endpoint: endpoint.as_deref(),
        descriptor: file.provider.as_ref().map(|d| d.to_descriptor()).transpose()?,
        hash_dim: DEFAULT_HASH_DIM,
        fixture_mode: resolve_fixtures(args.fixtures, file)?,
        fixtures_dir: fixtures_dir.as_deref(),
    };
    let provider = provider::for_manifest(&spec, &index.manifest().provider)?;
    provider::check_compatible(provider.as_ref(), &index.manifest().provider)?;

    let mut vectors = provider
        .embed_batch(&[EmbedInput::text(&args.query)])
        .map_err(|e| anyhow::anyhow!("embedding query: {e}"))?;
    anyhow::ensure!(vectors.len() == 1, "provider returned {} embeddings for one query", vectors.len());
    let query = vectors.remove(0);
    let ranked = doc_scores(&query, &index, k).map_err(|e| anyhow::anyhow!("{e}"))?;

    emit_report(
        &SearchReport {
            query: args.query,
            k,
            hits: ranked
                .into_iter()
                .enumerate()
                .map(|(i, doc)| Hit { rank: i + 1, doc })
                .collect(),
        },
        None,
    )
}
