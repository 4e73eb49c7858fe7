//! `texrank ingest`: run the LaTeX pipeline over a corpus and write
//! per-document artifacts for inspection and downstream commands.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use texrank_core::ingest::IngestOptions;

use crate::commands::emit_report;
use crate::config::{self, FileConfig};
use crate::corpus::{ingest_corpus, DocFailure};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus directory: one subdirectory or .tar.gz archive per document.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Directory for per-document outputs.
    #[arg(long)]
    out: PathBuf,
    /// Fail a document on missing includes instead of skipping them.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    corpus: String,
    documents: usize,
    failures: Vec<DocFailure>,
    diagnostics: usize,
}

pub fn run(args: IngestArgs, file: &FileConfig) -> Result<()> {
    let corpus = config::pick_opt(args.corpus, file.corpus.clone())
        .context("--corpus is required (flag or config)")?;
    let mut options = IngestOptions::default();
    options.flatten.lenient = !args.strict;

    let result = ingest_corpus(&corpus, &options)?;
    let mut diagnostics = 0;
    for doc in &result.docs {
        let dir = args.out.join(&doc.doc_id);
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("flattened.tex"), &doc.flat.text)?;
        std::fs::write(dir.join("normalized.txt"), &doc.normalized)?;
        std::fs::write(
            dir.join("structure.json"),
            serde_json::to_string_pretty(&doc.structure)? + "\n",
        )?;
        let notes = doc.diagnostics.notes();
        diagnostics += notes.len();
        let mut text = notes.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        std::fs::write(dir.join("diagnostics.txt"), text)?;
        if !doc.assets.resolved.is_empty() {
            let assets = dir.join("assets");
            std::fs::create_dir_all(&assets)?;
            for asset in &doc.assets.resolved {
                let name = format!(
                    "fig-{:03}-{}.{}",
                    asset.figure_index,
                    asset.asset_index,
                    asset.format.extension()
                );
                std::fs::write(assets.join(name), &asset.bytes)?;
            }
        }
    }

    emit_report(
        &IngestReport {
            corpus: corpus.display().to_string(),
            documents: result.docs.len(),
            failures: result.failures,
            diagnostics,
        },
        Some(&args.out.join("ingest-report.json")),
    )
}
