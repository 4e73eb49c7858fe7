//! `texrank eval`: score a query file against an index and write the
//! evaluation report as JSON and per-query CSV.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use texrank_core::embed::FixtureMode;
use texrank_core::eval::{evaluate, EvalReport, DEFAULT_K};
use texrank_core::index::VectorIndex;
use texrank_core::query::read_queries;

use crate::commands::emit_report;
use crate::commands::index::resolve_fixtures;
use crate::config::{self, FileConfig};
use crate::provider::{self, ProviderSpec, DEFAULT_HASH_DIM};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Index file written by `texrank index`.
    #[arg(long)]
    index: PathBuf,
    /// Query file, one JSON query per line.
    #[arg(long)]
    queries: PathBuf,
    /// Rank cutoff for the quality metric.
    #[arg(long)]
    k: Option<usize>,
    /// Write the full report here as JSON.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write per-query rows here as CSV.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Remote embedding endpoint; omit to use the built-in provider
    /// matching the index's descriptor.
    #[arg(long)]
    provider_endpoint: Option<String>,
    #[arg(long)]
    fixtures: Option<FixtureMode>,
    #[arg(long)]
    fixtures_dir: Option<PathBuf>,
}

pub fn run(args: EvalArgs, file: &FileConfig) -> Result<()> {
    // Load both inputs before producing any output, so a missing file
    // cannot leave a partial report behind.
    let index = VectorIndex::read_from(&args.index)
        .with_context(|| format!("reading index {}", args.index.display()))?;
    let queries = read_queries(&args.queries)
        .with_context(|| format!("reading queries {}", args.queries.display()))?;
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

    let report = evaluate(&queries, &index, provider.as_ref(), k)
        .map_err(|e| anyhow::anyhow!("evaluation failed: {e}"))?;
    if let Some(path) = &args.out_csv {
        write_csv(&report, path)?;
    }
    emit_report(&report, args.out_json.as_deref())
}

fn write_csv(report: &EvalReport, path: &std::path::Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    writer.write_record(["query_id", "evidence_type", "gold_doc_id", "gold_rank", "ndcg", "top_doc_id"])?;
    for q in &report.per_query {
        writer.write_record([
            q.query_id.as_str(),
            q.evidence_type.as_str(),
            q.gold_doc_id.as_str(),
            &q.gold_rank.map(|r| r.to_string()).unwrap_or_default(),
            &format!("{:.6}", q.ndcg),
            q.top_doc_id.as_deref().unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
