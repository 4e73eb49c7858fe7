//! LaTeX project ingestion: loading multi-file sources, flattening includes,
//! normalizing markup, extracting document structure, and resolving graphics
//! assets.

mod assets;
mod flatten;
mod normalize;
mod project;
mod structure;

pub use assets::{
    resolve_assets, AssetError, AssetFormat, AssetResolution, ConverterCommand, MissingAsset,
    ResolvedAsset,
};
pub use flatten::{flatten, FlatSource, FlattenError, FlattenOptions, OriginSpan, SpanOrigin};
pub use normalize::{normalize, NormalizationPolicy, NormalizeStats, PolicyError};
pub use project::{load_corpus, CorpusLoad, LatexProject, ProjectError};
pub use structure::{extract_structure, DocumentStructure, FigureBlock, SectionSpan, TableBlock};
