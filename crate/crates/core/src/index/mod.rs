//! A single-file binary store for unit embeddings, with exact storage
//! accounting and checksummed payload.
//!
//! Desk-scale corpora need no approximate-nearest-neighbor structure;
//! scoring scans the index exhaustively, so the store optimizes for
//! contiguous per-unit vectors and byte-deterministic serialization.

mod format;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embed::{Precision, ProviderDescriptor, UnitEmbedding, VectorMode};
use crate::repr::RepresentationKind;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("index format version {found}.x is newer than supported {supported}.x")]
    FormatVersionMismatch { found: u16, supported: u16 },
    #[error("index file integrity check failed: {detail}")]
    ChecksumMismatch { detail: String },
    #[error("embedding for {doc_id}/{unit_id} has dimension {got}, index expects {expected}")]
    DimensionMismatch {
        doc_id: String,
        unit_id: String,
        expected: usize,
        got: usize,
    },
    #[error("embedding for unknown document {doc_id} (not in the corpus manifest)")]
    UnknownDoc { doc_id: String },
}

/// Build parameters and corpus identity, stored verbatim in the file so a
/// loaded index is self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub representation: RepresentationKind,
    pub provider: ProviderDescriptor,
    pub chunk_size: usize,
    pub overlap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pixels: Option<u64>,
    pub precision: Precision,
    /// Hash of the corpus document list, so reports can tie an index back
    /// to the corpus it was built from.
    pub corpus_fingerprint: String,
    /// Every document in the corpus, including those that contributed zero
    /// units under this representation.
    pub doc_ids: Vec<String>,
}

impl IndexManifest {
    pub fn new(
        representation: RepresentationKind,
        provider: ProviderDescriptor,
        chunk_size: usize,
        overlap: usize,
        max_pixels: Option<u64>,
        precision: Precision,
        doc_ids: Vec<String>,
    ) -> Self {
        let corpus_fingerprint = fingerprint(&doc_ids);
        Self {
            representation,
            provider,
            chunk_size,
            overlap,
            max_pixels,
            precision,
            corpus_fingerprint,
            doc_ids,
        }
    }
}

fn fingerprint(doc_ids: &[String]) -> String {
    let mut hasher = Sha256::new();
    for id in doc_ids {
        hasher.update(id.as_bytes());
        hasher.update(b"\n");
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One stored unit: identity plus its row count. Vector data lives in the
/// shared payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub doc_id: String,
    pub unit_id: String,
    pub rows: usize,
}

/// An immutable embedding store. Vectors are held dequantized (f32) in
/// memory; the declared precision governs on-disk encoding and size
/// accounting, and f16 indexes quantize at build time so that the in-memory
/// values and the file round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    manifest: IndexManifest,
    dim: usize,
    entries: Vec<IndexEntry>,
    /// entry i's rows start at payload[row_starts[i] * dim].
    row_starts: Vec<usize>,
    payload: Vec<f32>,
}

impl VectorIndex {
    /// Assemble an index from computed embeddings. Entry order follows
    /// input order; every embedding must belong to a manifest document and
    /// match the provider dimension.
    pub fn build(
        manifest: IndexManifest,
        embeddings: &[UnitEmbedding],
    ) -> Result<Self, IndexError> {
        let dim = manifest.provider.dimension;
        let known: std::collections::BTreeSet<&str> =
            manifest.doc_ids.iter().map(String::as_str).collect();

        let mut entries = Vec::with_capacity(embeddings.len());
        let mut row_starts = Vec::with_capacity(embeddings.len());
        let mut payload = Vec::new();
        let mut total_rows = 0usize;
        for embedding in embeddings {
            if !known.contains(embedding.doc_id.as_str()) {
                return Err(IndexError::UnknownDoc {
                    doc_id: embedding.doc_id.clone(),
                });
            }
            if embedding.vectors.dim() != dim && embedding.vectors.rows() > 0 {
                return Err(IndexError::DimensionMismatch {
                    doc_id: embedding.doc_id.clone(),
                    unit_id: embedding.unit_id.clone(),
                    expected: dim,
                    got: embedding.vectors.dim(),
                });
            }
            entries.push(IndexEntry {
                doc_id: embedding.doc_id.clone(),
                unit_id: embedding.unit_id.clone(),
                rows: embedding.vectors.rows(),
            });
            row_starts.push(total_rows);
            total_rows += embedding.vectors.rows();
            payload.extend_from_slice(embedding.vectors.data());
        }

        if manifest.precision == Precision::F16 {
            for value in payload.iter_mut() {
                *value = half::f16::from_f32(*value).to_f32();
            }
        }

        Ok(Self {
            manifest,
            dim,
            entries,
            row_starts,
            payload,
        })
    }

    pub fn manifest(&self) -> &IndexManifest {
        &self.manifest
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn precision(&self) -> Precision {
        self.manifest.precision
    }

    pub fn vector_mode(&self) -> VectorMode {
        self.manifest.provider.vector_mode
    }

    /// Number of stored units.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    /// The vector rows of entry `i`, flattened row-major.
    pub fn unit_rows(&self, i: usize) -> &[f32] {
        let start = self.row_starts[i] * self.dim;
        let end = start + self.entries[i].rows * self.dim;
        &self.payload[start..end]
    }

    pub fn iter_units(&self) -> impl Iterator<Item = (&IndexEntry, &[f32])> {
        (0..self.entries.len()).map(move |i| (&self.entries[i], self.unit_rows(i)))
    }

    /// Manifest documents that contributed no units under this
    /// representation (e.g. figure-free docs in a figures-only index).
    pub fn empty_docs(&self) -> Vec<&str> {
        let present: std::collections::BTreeSet<&str> =
            self.entries.iter().map(|e| e.doc_id.as_str()).collect();
        self.manifest
            .doc_ids
            .iter()
            .map(String::as_str)
            .filter(|id| !present.contains(id))
            .collect()
    }

    /// Total bytes of stored vectors: Σ rows × dimension × bytes-per-value.
    /// Exactly the byte length of the payload section of the saved file;
    /// manifest and entry-table overhead are excluded by definition.
    pub fn index_size_bytes(&self) -> u64 {
        self.payload.len() as u64 * self.manifest.precision.bytes_per_value() as u64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        format::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        format::decode(bytes)
    }

    pub fn write_to(&self, path: &std::path::Path) -> Result<(), IndexError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| IndexError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_from(path: &std::path::Path) -> Result<Self, IndexError> {
        let bytes = std::fs::read(path).map_err(|source| IndexError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    pub(crate) fn from_parts(
        manifest: IndexManifest,
        dim: usize,
        entries: Vec<IndexEntry>,
        payload: Vec<f32>,
    ) -> Self {
        let mut row_starts = Vec::with_capacity(entries.len());
        let mut total = 0usize;
        for entry in &entries {
            row_starts.push(total);
            total += entry.rows;
        }
        Self {
            manifest,
            dim,
            entries,
            row_starts,
            payload,
        }
    }
}
