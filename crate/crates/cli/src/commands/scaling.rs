//! `texrank analyze-scaling`: cut nested context windows around a fixed
//! query span of one document, for studying how retrieval behaves as the
//! surrounding context grows.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use texrank_core::eval::{
    build_scaling_windows, wrap_as_latex, DEFAULT_QUERY_TOKENS, DEFAULT_WINDOW_SIZES,
};
use texrank_core::ingest::{ingest_project, IngestOptions};
use texrank_core::latex::LatexProject;

use crate::commands::emit_report;
use crate::config::{self, FileConfig};

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// A LaTeX source file to cut windows from.
    input: PathBuf,
    /// Seed for the window placement.
    #[arg(long)]
    seed: Option<u64>,
    /// Tokens in the fixed query span.
    #[arg(long, default_value_t = DEFAULT_QUERY_TOKENS)]
    query_tokens: usize,
    /// Comma-separated window sizes in tokens, ascending.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Write the window set here as JSON (default: stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write each window as a compilable LaTeX snippet into this
    /// directory.
    #[arg(long)]
    emit_latex: Option<PathBuf>,
}

pub fn run(args: ScalingArgs, file: &FileConfig) -> Result<()> {
    let source = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let doc_id = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "document".into());
    let mut options = IngestOptions::default();
    options.flatten.lenient = true;
    let doc = ingest_project(&LatexProject::single(doc_id, source), &options)
        .map_err(|e| anyhow::anyhow!("ingesting {}: {e}", args.input.display()))?;

    let sizes = if args.sizes.is_empty() {
        DEFAULT_WINDOW_SIZES.to_vec()
    } else {
        args.sizes.clone()
    };
    let seed = config::pick(args.seed, file.seed, 0);
    let set = build_scaling_windows(&doc.normalized, args.query_tokens, &sizes, seed)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    if let Some(dir) = &args.emit_latex {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("query.txt"), format!("{}\n", set.query))?;
        for window in &set.windows {
            std::fs::write(
                dir.join(format!("window-{:05}.tex", window.size)),
                wrap_as_latex(&window.text),
            )?;
        }
    }
    emit_report(&set, args.out.as_deref())
}
