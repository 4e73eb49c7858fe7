//! Embedding providers and the machinery around them: descriptors, the
//! vector matrix type, a deterministic local hash provider for offline runs
//! and tests, a remote HTTP provider, image budget handling, and the
//! batch/retry dispatcher that turns units into embeddings.

mod dispatch;
mod hash;
mod pixels;
mod remote;
mod transport;

pub use dispatch::{
    embed_units, EmbedError, EmbedOptions, EmbedRun, RetryPolicy, UnitFailure,
};
pub use hash::{fnv1a64, hash_embed, token_bucket, HashProvider};
pub use pixels::{
    estimate_visual_tokens, image_dimensions, resize_for_budget, resize_image_to_budget,
    ImageError,
};
pub use remote::RemoteProvider;
pub use transport::{
    request_key, FixtureMode, FixtureRecorder, FixtureReplayer, HttpTransport, Transport,
    TransportError, AUTH_TOKEN_ENV,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repr::{EmbeddingUnit, ImageBlob};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
    Multimodal,
}

impl Modality {
    pub fn accepts_text(self) -> bool {
        matches!(self, Self::Text | Self::Multimodal)
    }

    pub fn accepts_images(self) -> bool {
        matches!(self, Self::Image | Self::Multimodal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorMode {
    /// One vector per unit.
    Single,
    /// A matrix of vectors per unit, scored with late interaction.
    Multi,
}

impl std::fmt::Display for VectorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Single => "single-vector",
            Self::Multi => "multi-vector",
        })
    }
}

/// Storage precision for vector payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F16,
}

impl Precision {
    pub fn bytes_per_value(self) -> usize {
        match self {
            Self::F32 => 4,
            Self::F16 => 2,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f32" => Ok(Self::F32),
            "f16" => Ok(Self::F16),
            other => Err(format!("unknown precision `{other}` (expected f32 or f16)")),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::F32 => "f32",
            Self::F16 => "f16",
        })
    }
}

/// Everything a caller needs to know about an embedding provider to build
/// and later interpret an index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub name: String,
    pub modality: Modality,
    pub vector_mode: VectorMode,
    pub dimension: usize,
    /// Provider promises unit-L2-norm rows.
    pub normalizes: bool,
    /// Pixel budget images are resized to fit, when the provider has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pixels: Option<u64>,
    /// Patch edge length for visual token estimation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_size: Option<u32>,
}

/// A dense rows × dim matrix in row-major order. Single-vector embeddings
/// are the `rows == 1` case.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("matrix shape mismatch: {rows} rows x {dim} dim needs {expected} values, got {got}")]
pub struct ShapeError {
    pub rows: usize,
    pub dim: usize,
    pub expected: usize,
    pub got: usize,
}

impl Embedding {
    pub fn new(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self, ShapeError> {
        if rows * dim != data.len() {
            return Err(ShapeError {
                rows,
                dim,
                expected: rows * dim,
                got: data.len(),
            });
        }
        Ok(Self { rows, dim, data })
    }

    pub fn single(vector: Vec<f32>) -> Self {
        Self {
            rows: 1,
            dim: vector.len(),
            data: vector,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f32>>, dim: usize) -> Result<Self, ShapeError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * dim);
        for row in rows {
            if row.len() != dim {
                return Err(ShapeError {
                    rows: n,
                    dim,
                    expected: n * dim,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { rows: n, dim, data })
    }

    /// An embedding with no rows (used for units that produced no vectors).
    pub fn empty(dim: usize) -> Self {
        Self {
            rows: 0,
            dim,
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// The vectors a provider produced for one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitEmbedding {
    pub doc_id: String,
    pub unit_id: String,
    pub vectors: Embedding,
    pub precision: Precision,
}

/// What gets sent to a provider for one unit (or one query).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbedInput {
    pub text: Option<String>,
    pub images: Vec<ImageBlob>,
}

impl EmbedInput {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: Some(text.into()),
            images: Vec::new(),
        }
    }
}

impl From<&EmbeddingUnit> for EmbedInput {
    fn from(unit: &EmbeddingUnit) -> Self {
        Self {
            text: unit.text.clone(),
            images: unit.images.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("provider returned dimension {got}, descriptor declares {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("provider returned {got} results for {expected} inputs")]
    CountMismatch { expected: usize, got: usize },
}

pub trait EmbeddingProvider: Sync {
    fn descriptor(&self) -> &ProviderDescriptor;

    /// Embed a batch of inputs, one result matrix per input, in order.
    fn embed_batch(&self, inputs: &[EmbedInput]) -> Result<Vec<Embedding>, ProviderError>;
}
