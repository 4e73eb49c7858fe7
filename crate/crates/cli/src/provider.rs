//! Provider and transport wiring. A run either talks to a remote embedding
//! endpoint (optionally recording or replaying fixtures) or falls back to
//! the built-in deterministic hash provider for offline work.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use texrank_core::embed::{
    EmbeddingProvider, FixtureMode, FixtureRecorder, FixtureReplayer, HashProvider, HttpTransport,
    RemoteProvider, Transport,
};
use texrank_core::RepresentationKind;

pub const DEFAULT_HASH_DIM: usize = 512;
const DEFAULT_HASH_PIXELS: u64 = 768 * 768;
const DEFAULT_HASH_PATCH: u32 = 14;

/// Build a transport honoring the fixture mode. `Replay` never opens a
/// network connection.
pub fn transport(mode: FixtureMode, fixtures_dir: Option<&Path>) -> Result<Arc<dyn Transport>> {
    match mode {
        FixtureMode::Off => Ok(Arc::new(HttpTransport::default())),
        FixtureMode::Record => {
            let dir = fixtures_required(fixtures_dir, "record")?;
            let recorder = FixtureRecorder::new(HttpTransport::default(), &dir)
                .with_context(|| format!("opening fixture dir {}", dir.display()))?;
            Ok(Arc::new(recorder))
        }
        FixtureMode::Replay => {
            let dir = fixtures_required(fixtures_dir, "replay")?;
            Ok(Arc::new(FixtureReplayer::new(&dir)))
        }
    }
}

fn fixtures_required(dir: Option<&Path>, mode: &str) -> Result<PathBuf> {
    dir.map(Path::to_path_buf)
        .ok_or_else(|| anyhow::anyhow!("--fixtures {mode} needs --fixtures-dir"))
}

pub struct ProviderSpec<'a> {
    pub endpoint: Option<&'a str>,
    pub descriptor: Option<texrank_core::embed::ProviderDescriptor>,
    pub hash_dim: usize,
    pub fixture_mode: FixtureMode,
    pub fixtures_dir: Option<&'a Path>,
}

/// Build the embedding provider for a run. With an endpoint the descriptor
/// must be configured too; without one, a deterministic local provider is
/// chosen to match what the representation feeds it.
pub fn build(spec: &ProviderSpec<'_>, rep: RepresentationKind) -> Result<Box<dyn EmbeddingProvider>> {
    if let Some(endpoint) = spec.endpoint {
        let descriptor = spec.descriptor.clone().ok_or_else(|| {
            anyhow::anyhow!("remote provider needs a [provider] descriptor in the config file")
        })?;
        let transport = transport(spec.fixture_mode, spec.fixtures_dir)?;
        return Ok(Box::new(RemoteProvider::new(descriptor, endpoint, transport)));
    }
    let provider = match rep {
        RepresentationKind::TextOnly | RepresentationKind::TextPlusCaptions => {
            HashProvider::text_single(spec.hash_dim)
        }
        _ => HashProvider::multimodal_single(spec.hash_dim, DEFAULT_HASH_PIXELS, DEFAULT_HASH_PATCH),
    };
    Ok(Box::new(provider))
}

/// Build a provider to query an existing index: remote when an endpoint is
/// given (descriptor from config, else the one echoed into the index),
/// otherwise a local provider mirroring the index's descriptor exactly.
pub fn for_manifest(
    spec: &ProviderSpec<'_>,
    indexed: &texrank_core::embed::ProviderDescriptor,
) -> Result<Box<dyn EmbeddingProvider>> {
    use texrank_core::embed::{Modality, VectorMode};

    if let Some(endpoint) = spec.endpoint {
        let descriptor = spec.descriptor.clone().unwrap_or_else(|| indexed.clone());
        let transport = transport(spec.fixture_mode, spec.fixtures_dir)?;
        return Ok(Box::new(RemoteProvider::new(descriptor, endpoint, transport)));
    }
    let dim = indexed.dimension;
    let pixels = indexed.max_pixels.unwrap_or(DEFAULT_HASH_PIXELS);
    let patch = indexed.patch_size.unwrap_or(DEFAULT_HASH_PATCH);
    let provider = match (indexed.modality, indexed.vector_mode) {
        (Modality::Text, VectorMode::Single) => HashProvider::text_single(dim),
        (Modality::Text, VectorMode::Multi) => HashProvider::text_multi(dim),
        (_, VectorMode::Single) => HashProvider::multimodal_single(dim, pixels, patch),
        (_, VectorMode::Multi) => HashProvider::multimodal_multi(dim, pixels, patch),
    };
    Ok(Box::new(provider))
}

/// A provider whose shape disagrees with the index it will query is a
/// configuration error worth failing fast on.
pub fn check_compatible(
    provider: &dyn EmbeddingProvider,
    indexed: &texrank_core::embed::ProviderDescriptor,
) -> Result<()> {
    let d = provider.descriptor();
    anyhow::ensure!(
        d.dimension == indexed.dimension,
        "provider dimension {} does not match the index's {}",
        d.dimension,
        indexed.dimension
    );
    anyhow::ensure!(
        d.vector_mode == indexed.vector_mode,
        "provider vector mode {} does not match the index's {}",
        d.vector_mode,
        indexed.vector_mode
    );
    Ok(())
}
