//! `texrank index`: build one representation of the corpus, embed it, and
//! save the vector index.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use texrank_core::embed::{embed_units, EmbedOptions, FixtureMode, Precision};
use texrank_core::index::{IndexManifest, VectorIndex};
use texrank_core::ingest::IngestOptions;
use texrank_core::repr::{
    build_doc_as_image, build_figures_only, build_interleaved, build_text_only,
    build_text_plus_captions, CaptionSet, ChunkingConfig, EmbeddingUnit, ImageBlob, ImageFormat,
};
use texrank_core::{Diagnostics, IngestedDocument, RepresentationKind};

use crate::commands::emit_report;
use crate::config::{self, FileConfig};
use crate::corpus::ingest_corpus;
use crate::provider::{self, ProviderSpec, DEFAULT_HASH_DIM};

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Corpus directory: one subdirectory or .tar.gz archive per document.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Representation to build: text, text+captions, figures, doc-image,
    /// or interleaved.
    #[arg(long)]
    rep: Option<RepresentationKind>,
    /// Where to write the index file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// Pixel budget recorded in the manifest (images are resized to the
    /// provider's own budget when it declares one).
    #[arg(long)]
    max_pixels: Option<u64>,
    /// Stored vector precision: f32 or f16.
    #[arg(long)]
    precision: Option<Precision>,
    /// Remote embedding endpoint; omit to use the built-in deterministic
    /// provider.
    #[arg(long)]
    provider_endpoint: Option<String>,
    /// Dimension of the built-in provider.
    #[arg(long)]
    hash_dim: Option<usize>,
    /// Fixture handling for the remote endpoint: off, record, or replay.
    #[arg(long)]
    fixtures: Option<FixtureMode>,
    #[arg(long)]
    fixtures_dir: Option<PathBuf>,
    /// Concurrent embedding requests; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Caption file for text+captions: doc_id, unit_id, caption (TSV).
    #[arg(long)]
    captions: Option<PathBuf>,
    /// Page image root for doc-image: <dir>/<doc_id>/page-0001.png, ...
    #[arg(long)]
    pages: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct IndexReport {
    index: String,
    representation: RepresentationKind,
    documents: usize,
    units: usize,
    empty_docs: Vec<String>,
    index_size_bytes: u64,
    embed_failures: usize,
    diagnostics: usize,
}

pub fn run(args: IndexArgs, file: &FileConfig) -> Result<()> {
    let corpus = config::pick_opt(args.corpus, file.corpus.clone())
        .context("--corpus is required (flag or config)")?;
    let rep = resolve_rep(args.rep, file)?;
    let chunking = ChunkingConfig::new(
        config::pick(args.chunk_size, file.chunk_size, ChunkingConfig::default().chunk_size),
        config::pick(args.overlap, file.overlap, ChunkingConfig::default().overlap),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let precision = match config::pick_opt(args.precision.map(|p| p.to_string()), file.precision.clone())
    {
        Some(s) => config::parse_from_file::<Precision>(&s, "precision")?,
        None => Precision::F32,
    };
    let max_pixels = config::pick_opt(args.max_pixels, file.max_pixels);
    let endpoint = config::pick_opt(args.provider_endpoint, file.provider_endpoint.clone());
    let fixture_mode = resolve_fixtures(args.fixtures, file)?;
    let fixtures_dir = config::pick_opt(args.fixtures_dir, file.fixtures_dir.clone());
    let descriptor = file
        .provider
        .as_ref()
        .map(|d| d.to_descriptor())
        .transpose()?;

    let mut options = IngestOptions::default();
    options.flatten.lenient = true;
    let corpus_data = ingest_corpus(&corpus, &options)?;
    for failure in &corpus_data.failures {
        eprintln!("warning: skipping {}: {}", failure.doc_id, failure.error);
    }
    anyhow::ensure!(!corpus_data.docs.is_empty(), "no ingestable documents in corpus");

    let captions = load_captions(args.captions.as_deref())?;
    let mut units = Vec::new();
    let mut diagnostics = Diagnostics::new();
    for doc in &corpus_data.docs {
        let built = build_units(doc, rep, &chunking, &captions, args.pages.as_deref())?;
        units.extend(built.0);
        diagnostics.absorb(built.1);
    }
    if units.is_empty() {
        eprintln!("warning: representation `{rep}` produced no units for this corpus; writing an empty index");
    }

    let spec = ProviderSpec {
        endpoint: endpoint.as_deref(),
        descriptor,
        hash_dim: config::pick(args.hash_dim, file.hash_dim, DEFAULT_HASH_DIM),
        fixture_mode,
        fixtures_dir: fixtures_dir.as_deref(),
    };
    let provider = provider::build(&spec, rep)?;
    let mut embed_options = EmbedOptions::default();
    if let Some(workers) = config::pick_opt(args.workers, file.workers) {
        anyhow::ensure!(workers > 0, "--workers must be at least 1");
        embed_options.workers = workers;
    }
    let run = embed_units(&units, provider.as_ref(), &embed_options)
        .map_err(|e| anyhow::anyhow!("embedding failed: {e}"))?;
    for failure in &run.failures {
        eprintln!(
            "warning: embedding failed for {}/{}: {}",
            failure.doc_id, failure.unit_id, failure.reason
        );
    }
    diagnostics.absorb(run.diagnostics);

    let doc_ids: Vec<String> = corpus_data.docs.iter().map(|d| d.doc_id.clone()).collect();
    let manifest = IndexManifest::new(
        rep,
        run.descriptor.clone(),
        chunking.chunk_size,
        chunking.overlap,
        max_pixels,
        precision,
        doc_ids,
    );
    let index = VectorIndex::build(manifest, &run.embeddings)
        .map_err(|e| anyhow::anyhow!("building index: {e}"))?;
    index
        .write_to(&args.out)
        .with_context(|| format!("writing index {}", args.out.display()))?;

    emit_report(
        &IndexReport {
            index: args.out.display().to_string(),
            representation: rep,
            documents: corpus_data.docs.len(),
            units: run.embeddings.len(),
            empty_docs: index.empty_docs().iter().map(|s| s.to_string()).collect(),
            index_size_bytes: index.index_size_bytes(),
            embed_failures: run.failures.len(),
            diagnostics: diagnostics.len(),
        },
        None,
    )
}

pub fn resolve_rep(flag: Option<RepresentationKind>, file: &FileConfig) -> Result<RepresentationKind> {
    match config::pick_opt(flag.map(|r| r.to_string()), file.rep.clone()) {
        Some(s) => config::parse_from_file(&s, "rep"),
        None => Ok(RepresentationKind::TextOnly),
    }
}

pub fn resolve_fixtures(flag: Option<FixtureMode>, file: &FileConfig) -> Result<FixtureMode> {
    match config::pick_opt(flag.map(|m| mode_str(m).to_string()), file.fixtures.clone()) {
        Some(s) => config::parse_from_file(&s, "fixtures"),
        None => Ok(FixtureMode::Off),
    }
}

fn mode_str(mode: FixtureMode) -> &'static str {
    match mode {
        FixtureMode::Off => "off",
        FixtureMode::Record => "record",
        FixtureMode::Replay => "replay",
    }
}

fn load_captions(path: Option<&Path>) -> Result<CaptionSet> {
    let Some(path) = path else {
        return Ok(CaptionSet::new());
    };
    let (set, diags) =
        CaptionSet::read_tsv(path).with_context(|| format!("reading captions {}", path.display()))?;
    for note in diags.notes() {
        eprintln!("warning: captions: {note}");
    }
    Ok(set)
}

fn build_units(
    doc: &IngestedDocument,
    rep: RepresentationKind,
    chunking: &ChunkingConfig,
    captions: &CaptionSet,
    pages_root: Option<&Path>,
) -> Result<(Vec<EmbeddingUnit>, Diagnostics)> {
    let output = match rep {
        RepresentationKind::TextOnly => build_text_only(doc, chunking),
        RepresentationKind::TextPlusCaptions => build_text_plus_captions(doc, captions, chunking),
        RepresentationKind::FiguresOnly => Ok(build_figures_only(doc)),
        RepresentationKind::Interleaved => build_interleaved(doc, chunking),
        RepresentationKind::DocAsImage => {
            let mut diags = Diagnostics::new();
            let pages = load_pages(doc, pages_root, &mut diags)?;
            if pages.is_empty() {
                return Ok((Vec::new(), diags));
            }
            let mut output = build_doc_as_image(&doc.doc_id, pages)
                .map_err(|e| anyhow::anyhow!("{}: {e}", doc.doc_id))?;
            output.diagnostics.absorb(diags);
            return Ok((output.units, output.diagnostics));
        }
    }
    .map_err(|e| anyhow::anyhow!("{}: {e}", doc.doc_id))?;
    Ok((output.units, output.diagnostics))
}

/// Read pre-rendered page images laid out as `<root>/<doc_id>/page-0001.png`.
fn load_pages(
    doc: &IngestedDocument,
    pages_root: Option<&Path>,
    diags: &mut Diagnostics,
) -> Result<Vec<ImageBlob>> {
    let Some(root) = pages_root else {
        anyhow::bail!("--rep doc-image needs --pages pointing at rendered page images");
    };
    let dir = root.join(&doc.doc_id);
    if !dir.is_dir() {
        diags.note(format!("{}: no rendered pages under {}", doc.doc_id, dir.display()));
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("page-") && (n.ends_with(".png") || n.ends_with(".jpg")))
        })
        .collect();
    paths.sort();
    let mut pages = Vec::new();
    for path in paths {
        let format = if path.extension().is_some_and(|e| e == "jpg") {
            ImageFormat::Jpg
        } else {
            ImageFormat::Png
        };
        pages.push(ImageBlob {
            bytes: std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?,
            format,
        });
    }
    Ok(pages)
}
