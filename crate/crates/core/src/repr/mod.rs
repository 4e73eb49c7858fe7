//! Document representations: slicing an ingested document into embedding
//! units. Five representations are supported, trading text for visual
//! context: plain text chunks, text with appended figure captions, figure
//! images alone, whole pages as images, and text chunks interleaved with the
//! figures anchored near them.

mod build;
mod captions;
mod chunk;

pub use build::{
    build_doc_as_image, build_figures_only, build_interleaved, build_text_only,
    build_text_plus_captions, chunk_unit_id, figure_unit_id, BuildOutput, RepresentationError,
};
pub use captions::{CaptionError, CaptionSet};
pub use chunk::{chunk_text, tokenize_spans, ChunkingConfig, ChunkingConfigError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::latex::AssetFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationKind {
    TextOnly,
    TextPlusCaptions,
    FiguresOnly,
    DocAsImage,
    Interleaved,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 5] = [
        Self::TextOnly,
        Self::TextPlusCaptions,
        Self::FiguresOnly,
        Self::DocAsImage,
        Self::Interleaved,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TextOnly => "text",
            Self::TextPlusCaptions => "text+captions",
            Self::FiguresOnly => "figures",
            Self::DocAsImage => "doc-image",
            Self::Interleaved => "interleaved",
        }
    }
}

impl std::fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RepresentationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::TextOnly),
            "text+captions" => Ok(Self::TextPlusCaptions),
            "figures" => Ok(Self::FiguresOnly),
            "doc-image" => Ok(Self::DocAsImage),
            "interleaved" => Ok(Self::Interleaved),
            other => Err(format!(
                "unknown representation `{other}` (expected text, text+captions, figures, doc-image, or interleaved)"
            )),
        }
    }
}

/// What a single embedding unit holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    TextChunk,
    Figure,
    PageImage,
    Interleaved,
}

/// Raster formats accepted in embedding units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Png,
    Jpg,
}

impl TryFrom<AssetFormat> for ImageFormat {
    type Error = AssetFormat;

    fn try_from(value: AssetFormat) -> Result<Self, AssetFormat> {
        match value {
            AssetFormat::Png => Ok(Self::Png),
            AssetFormat::Jpg => Ok(Self::Jpg),
            other => Err(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBlob {
    pub bytes: Vec<u8>,
    pub format: ImageFormat,
}

/// A contiguous run of whitespace tokens from a document's normalized text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub index: usize,
    pub text: String,
    pub token_count: usize,
    /// Byte span in the text the chunk was cut from.
    pub start: usize,
    pub end: usize,
}

/// One embeddable item: a text chunk, an image, or a text+image bundle.
/// `unit_id` is unique within its document and stable across rebuilds.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingUnit {
    pub doc_id: String,
    pub unit_id: String,
    pub kind: UnitKind,
    pub text: Option<String>,
    pub images: Vec<ImageBlob>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unit `{unit_id}` violates {kind:?} invariants: {message}")]
pub struct UnitInvariantError {
    pub unit_id: String,
    pub kind: UnitKind,
    pub message: String,
}

impl EmbeddingUnit {
    /// Check the per-kind shape invariants.
    pub fn validate(&self) -> Result<(), UnitInvariantError> {
        let fail = |message: &str| {
            Err(UnitInvariantError {
                unit_id: self.unit_id.clone(),
                kind: self.kind,
                message: message.to_string(),
            })
        };
        let has_text = self.text.as_deref().is_some_and(|t| !t.is_empty());
        match self.kind {
            UnitKind::TextChunk => {
                if !has_text {
                    return fail("text chunks need non-empty text");
                }
                if !self.images.is_empty() {
                    return fail("text chunks carry no images");
                }
            }
            UnitKind::Figure | UnitKind::PageImage => {
                if self.text.is_some() {
                    return fail("image units carry no text");
                }
                if self.images.len() != 1 {
                    return fail("image units carry exactly one image");
                }
            }
            UnitKind::Interleaved => {
                if !has_text {
                    return fail("interleaved units need non-empty text");
                }
                if self.images.is_empty() || self.images.len() > 2 {
                    return fail("interleaved units carry one or two images");
                }
            }
        }
        Ok(())
    }
}
