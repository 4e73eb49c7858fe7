//! Core library for turning LaTeX source corpora into retrievable document
//! collections and measuring retrieval quality over them.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`latex`] — load multi-file LaTeX projects, flatten includes, normalize
//!    away non-semantic markup, and extract figures/tables/sections plus their
//!    graphics assets.
//! 2. [`repr`] — slice a document into embedding units under one of five
//!    representations (text chunks, text plus captions, figures only, page
//!    images, or interleaved text+figures).
//! 3. [`embed`] — produce vectors for units via pluggable providers: a
//!    deterministic local hash provider or a remote HTTP service, with
//!    batching, retries, and record/replay fixtures.
//! 4. [`index`] — persist unit embeddings in a single-file binary index with
//!    checksummed payload and exact size accounting.
//! 5. [`retrieval`] — score queries against an index (cosine or late
//!    interaction) and rank documents; includes a BM25 baseline over chunks.
//! 6. [`query`] — generate, decontextualize, difficulty-filter, and verify
//!    benchmark queries through an LLM service client.
//! 7. [`eval`] — nDCG-based evaluation reports, context-scaling window
//!    construction, and figure/text association diagnostics.

pub mod diag;
pub mod embed;
pub mod eval;
pub mod index;
pub mod ingest;
pub mod latex;
pub mod query;
pub mod repr;
pub mod retrieval;

pub use diag::Diagnostics;
pub use embed::{
    EmbedInput, Embedding, Modality, Precision, ProviderDescriptor, UnitEmbedding, VectorMode,
};
pub use ingest::{IngestOptions, IngestedDocument};
pub use latex::{FlatSource, LatexProject};
pub use query::{EvidenceType, PipelineStats, Query, QueryStage};
pub use repr::{Chunk, EmbeddingUnit, RepresentationKind, UnitKind};
pub use retrieval::ScoredDoc;
