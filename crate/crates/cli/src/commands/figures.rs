//! `texrank analyze-figures`: diagnose how the text around each figure
//! relates to it — proximity, explicit references, and caption overlap.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use texrank_core::eval::{
    figure_text_diagnostics, summarize_figure_text, FigureTextDiagnostics, FigureTextParams,
    FigureTextSummary,
};
use texrank_core::ingest::IngestOptions;
use texrank_core::repr::{chunk_text, ChunkingConfig};

use crate::commands::emit_report;
use crate::config::{self, FileConfig};
use crate::corpus::ingest_corpus;

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Corpus directory to analyze.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// Chunks within this many positions of a figure count as near it.
    #[arg(long)]
    proximity_window: Option<usize>,
    /// Caption-overlap ratio at or above this flags the chunk as carrying
    /// the caption's information.
    #[arg(long)]
    overlap_threshold: Option<f64>,
    /// Keep every chunk-figure pair in the case list, not just flagged ones.
    #[arg(long)]
    full: bool,
    /// Write the analysis here as JSON (default: stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct FigureCase {
    doc_id: String,
    figure_index: usize,
    #[serde(flatten)]
    diagnostics: FigureTextDiagnostics,
}

#[derive(Debug, Serialize)]
struct FiguresReport {
    documents: usize,
    figures: usize,
    pairs: usize,
    /// Averages over the chunks inside each figure's proximity window.
    summary_near_window: FigureTextSummary,
    cases: Vec<FigureCase>,
}

pub fn run(args: FiguresArgs, file: &FileConfig) -> Result<()> {
    let corpus = config::pick_opt(args.corpus, file.corpus.clone())
        .context("--corpus is required (flag or config)")?;
    let chunking = ChunkingConfig::new(
        config::pick(args.chunk_size, file.chunk_size, ChunkingConfig::default().chunk_size),
        config::pick(args.overlap, file.overlap, ChunkingConfig::default().overlap),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let defaults = FigureTextParams::default();
    let params = FigureTextParams {
        proximity_window: args.proximity_window.unwrap_or(defaults.proximity_window),
        overlap_threshold: args.overlap_threshold.unwrap_or(defaults.overlap_threshold),
    };

    let mut options = IngestOptions::default();
    options.flatten.lenient = true;
    let corpus_data = ingest_corpus(&corpus, &options)?;

    let mut figures = 0;
    let mut pairs = 0;
    let mut near_cases = Vec::new();
    let mut cases = Vec::new();
    for doc in &corpus_data.docs {
        let chunks = chunk_text(&doc.doc_id, &doc.normalized, &chunking)
            .map_err(|e| anyhow::anyhow!("chunking {}: {e}", doc.doc_id))?;
        if chunks.is_empty() {
            continue;
        }
        for figure in &doc.structure.figures {
            figures += 1;
            for chunk in &chunks {
                let d = figure_text_diagnostics(
                    chunk,
                    &chunks,
                    figure.anchor,
                    figure.caption.as_deref(),
                    &params,
                );
                pairs += 1;
                if d.near_figure {
                    near_cases.push(d.clone());
                }
                if args.full || d.near_figure || d.references_figure || d.contains_caption_info {
                    cases.push(FigureCase {
                        doc_id: doc.doc_id.clone(),
                        figure_index: figure.index,
                        diagnostics: d,
                    });
                }
            }
        }
    }

    emit_report(
        &FiguresReport {
            documents: corpus_data.docs.len(),
            figures,
            pairs,
            summary_near_window: summarize_figure_text(&near_cases),
            cases,
        },
        args.out.as_deref(),
    )
}
