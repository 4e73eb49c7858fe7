//! Corpus loading shared by the subcommands: walk a corpus directory,
//! ingest every document, and report per-document failures without
//! sinking the run.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use texrank_core::ingest::{ingest_project, IngestOptions};
use texrank_core::latex::load_corpus;
use texrank_core::repr::{chunk_text, Chunk, ChunkingConfig};
use texrank_core::IngestedDocument;

#[derive(Debug, Serialize)]
pub struct DocFailure {
    pub doc_id: String,
    pub error: String,
}

pub struct IngestedCorpus {
    pub docs: Vec<IngestedDocument>,
    pub failures: Vec<DocFailure>,
}

/// Ingest every document under `dir` (one subdirectory or `.tar.gz` per
/// document). Documents that fail to load or ingest are tallied, not fatal;
/// an unreadable corpus directory is.
pub fn ingest_corpus(dir: &Path, options: &IngestOptions) -> Result<IngestedCorpus> {
    let load = load_corpus(dir).with_context(|| format!("reading corpus {}", dir.display()))?;
    let mut docs = Vec::new();
    let mut failures: Vec<DocFailure> = load
        .failures
        .into_iter()
        .map(|(doc_id, error)| DocFailure {
            doc_id,
            error: error.to_string(),
        })
        .collect();
    for project in &load.projects {
        match ingest_project(project, options) {
            Ok(doc) => docs.push(doc),
            Err(error) => failures.push(DocFailure {
                doc_id: project.doc_id().to_string(),
                error: error.to_string(),
            }),
        }
    }
    failures.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(IngestedCorpus { docs, failures })
}

/// Chunk every ingested document's normalized text with one config.
pub fn corpus_chunks(docs: &[IngestedDocument], config: &ChunkingConfig) -> Result<Vec<Chunk>> {
    let mut chunks = Vec::new();
    for doc in docs {
        chunks.extend(
            chunk_text(&doc.doc_id, &doc.normalized, config)
                .map_err(|e| anyhow::anyhow!("chunking {}: {e}", doc.doc_id))?,
        );
    }
    Ok(chunks)
}
