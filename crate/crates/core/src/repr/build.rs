//! Builders turning one ingested document into embedding units, one per
//! representation. All builders are pure functions of their inputs, so
//! rebuilding a corpus yields bit-identical units.

use thiserror::Error;

use crate::diag::Diagnostics;
use crate::ingest::IngestedDocument;
use crate::latex::ResolvedAsset;
use crate::repr::chunk::{chunk_text, ChunkingConfig, ChunkingConfigError};
use crate::repr::{Chunk, EmbeddingUnit, ImageBlob, ImageFormat, UnitKind};

#[derive(Debug, Error)]
pub enum RepresentationError {
    #[error(transparent)]
    Chunking(#[from] ChunkingConfigError),
    #[error("document `{0}` has no page images")]
    EmptyPages(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub units: Vec<EmbeddingUnit>,
    pub diagnostics: Diagnostics,
}

/// Doc-local unit id for the image of figure `figure_index`, asset slot
/// `asset_index`. Shared by the figures-only and caption-keyed paths.
pub fn figure_unit_id(figure_index: usize, asset_index: usize) -> String {
    format!("fig-{figure_index:03}-{asset_index}")
}

/// Unit id of the text chunk at `index`.
pub fn chunk_unit_id(index: usize) -> String {
    format!("chunk-{index:05}")
}

fn text_chunk_unit(chunk: &Chunk) -> EmbeddingUnit {
    EmbeddingUnit {
        doc_id: chunk.doc_id.clone(),
        unit_id: chunk_unit_id(chunk.index),
        kind: UnitKind::TextChunk,
        text: Some(chunk.text.clone()),
        images: Vec::new(),
    }
}

fn raster_blob(asset: &ResolvedAsset) -> Option<ImageBlob> {
    if asset.needs_conversion {
        return None;
    }
    ImageFormat::try_from(asset.format).ok().map(|format| ImageBlob {
        bytes: asset.bytes.clone(),
        format,
    })
}

/// Plain text chunks of the normalized source.
pub fn build_text_only(
    doc: &IngestedDocument,
    config: &ChunkingConfig,
) -> Result<BuildOutput, RepresentationError> {
    let chunks = chunk_text(&doc.doc_id, &doc.normalized, config)?;
    let mut diagnostics = Diagnostics::new();
    if chunks.is_empty() {
        diagnostics.note(format!("document `{}` has no text tokens", doc.doc_id));
    }
    Ok(BuildOutput {
        units: chunks.iter().map(text_chunk_unit).collect(),
        diagnostics,
    })
}

/// Text chunks over the normalized source with model-written figure captions
/// appended at the end of the document, one paragraph per captioned figure
/// image, in figure order.
pub fn build_text_plus_captions(
    doc: &IngestedDocument,
    captions: &crate::repr::CaptionSet,
    config: &ChunkingConfig,
) -> Result<BuildOutput, RepresentationError> {
    let mut diagnostics = Diagnostics::new();
    let mut augmented = doc.normalized.clone();
    for asset in &doc.assets.resolved {
        let unit_id = figure_unit_id(asset.figure_index, asset.asset_index);
        match captions.get(&doc.doc_id, &unit_id) {
            Some(caption) => {
                if !augmented.is_empty() {
                    augmented.push_str("\n\n");
                }
                augmented.push_str(caption);
            }
            None => diagnostics.note(format!(
                "no caption for `{}/{unit_id}`; figure skipped",
                doc.doc_id
            )),
        }
    }
    let chunks = chunk_text(&doc.doc_id, &augmented, config)?;
    if chunks.is_empty() {
        diagnostics.note(format!("document `{}` has no text tokens", doc.doc_id));
    }
    Ok(BuildOutput {
        units: chunks.iter().map(text_chunk_unit).collect(),
        diagnostics,
    })
}

/// One unit per resolved raster figure image, in document order. Synthetic
/// figures (no graphics file) and unconverted vector assets are skipped.
pub fn build_figures_only(doc: &IngestedDocument) -> BuildOutput {
    let mut diagnostics = Diagnostics::new();
    let mut units = Vec::new();
    for figure in &doc.structure.figures {
        if figure.synthetic {
            diagnostics.note(format!(
                "figure {} of `{}` is synthetic (no graphics file); skipped",
                figure.index, doc.doc_id
            ));
        }
    }
    for asset in &doc.assets.resolved {
        match raster_blob(asset) {
            Some(blob) => units.push(EmbeddingUnit {
                doc_id: doc.doc_id.clone(),
                unit_id: figure_unit_id(asset.figure_index, asset.asset_index),
                kind: UnitKind::Figure,
                text: None,
                images: vec![blob],
            }),
            None => diagnostics.note(format!(
                "asset `{}` of `{}` is not raster; skipped",
                asset.resolved_path, doc.doc_id
            )),
        }
    }
    if units.is_empty() {
        diagnostics.note(format!("document `{}` has no figure units", doc.doc_id));
    }
    BuildOutput { units, diagnostics }
}

/// One unit per rendered page image, in page order.
pub fn build_doc_as_image(
    doc_id: &str,
    pages: Vec<ImageBlob>,
) -> Result<BuildOutput, RepresentationError> {
    if pages.is_empty() {
        return Err(RepresentationError::EmptyPages(doc_id.to_string()));
    }
    let units = pages
        .into_iter()
        .enumerate()
        .map(|(i, blob)| EmbeddingUnit {
            doc_id: doc_id.to_string(),
            unit_id: format!("page-{:04}", i + 1),
            kind: UnitKind::PageImage,
            text: None,
            images: vec![blob],
        })
        .collect();
    Ok(BuildOutput {
        units,
        diagnostics: Diagnostics::new(),
    })
}

/// Text chunks with nearby figures attached: each resolved raster figure
/// image is attached to the chunk containing its figure's anchor. A chunk
/// keeps at most two images; extra images spill forward to the following
/// chunk (the overflow of the final chunk becomes continuation units that
/// repeat its text). Chunks with no figure nearby stay plain text chunks, so
/// a figure-free document produces exactly the text-only output.
pub fn build_interleaved(
    doc: &IngestedDocument,
    config: &ChunkingConfig,
) -> Result<BuildOutput, RepresentationError> {
    let chunks = chunk_text(&doc.doc_id, &doc.normalized, config)?;
    let mut diagnostics = Diagnostics::new();

    let mut attachable: Vec<(&ResolvedAsset, ImageBlob)> = Vec::new();
    for asset in &doc.assets.resolved {
        match raster_blob(asset) {
            Some(blob) => attachable.push((asset, blob)),
            None => diagnostics.note(format!(
                "asset `{}` of `{}` is not raster; skipped",
                asset.resolved_path, doc.doc_id
            )),
        }
    }

    if chunks.is_empty() {
        diagnostics.note(format!("document `{}` has no text tokens", doc.doc_id));
        if !attachable.is_empty() {
            diagnostics.note(format!(
                "document `{}` has figures but no text to attach them to; figures dropped",
                doc.doc_id
            ));
        }
        return Ok(BuildOutput {
            units: Vec::new(),
            diagnostics,
        });
    }

    // Attach each image to the chunk whose span contains its figure anchor
    // (anchors past the last chunk land on it). Document order is preserved.
    let mut assigned: Vec<Vec<ImageBlob>> = vec![Vec::new(); chunks.len()];
    for (asset, blob) in attachable {
        let anchor = doc.structure.figures[asset.figure_index].anchor;
        let idx = chunks
            .iter()
            .position(|c| anchor >= c.start && anchor < c.end)
            .unwrap_or(chunks.len() - 1);
        assigned[idx].push(blob);
    }

    // Forward spill: a chunk keeps its first two images, the rest move ahead
    // of the next chunk's own images.
    let last = chunks.len() - 1;
    let mut overflow: Vec<ImageBlob> = Vec::new();
    for i in 0..chunks.len() {
        if assigned[i].len() > 2 {
            let excess = assigned[i].split_off(2);
            if i < last {
                let tail = std::mem::take(&mut assigned[i + 1]);
                assigned[i + 1] = excess.into_iter().chain(tail).collect();
            } else {
                overflow = excess;
            }
        }
    }

    let mut units = Vec::new();
    for (chunk, images) in chunks.iter().zip(assigned) {
        if images.is_empty() {
            units.push(text_chunk_unit(chunk));
        } else {
            units.push(EmbeddingUnit {
                doc_id: doc.doc_id.clone(),
                unit_id: format!("unit-{:05}", chunk.index),
                kind: UnitKind::Interleaved,
                text: Some(chunk.text.clone()),
                images,
            });
        }
    }
    for (j, pair) in overflow.chunks(2).enumerate() {
        units.push(EmbeddingUnit {
            doc_id: doc.doc_id.clone(),
            unit_id: format!("unit-{:05}c{}", last, j + 1),
            kind: UnitKind::Interleaved,
            text: Some(chunks[last].text.clone()),
            images: pair.to_vec(),
        });
    }
    Ok(BuildOutput { units, diagnostics })
}
