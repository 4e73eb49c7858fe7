//! Optional TOML run configuration. Every value here can also be given as a
//! command-line flag, and flags win.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use texrank_core::embed::{Modality, ProviderDescriptor, VectorMode};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub rep: Option<String>,
    pub provider_endpoint: Option<String>,
    pub chunk_size: Option<usize>,
    pub overlap: Option<usize>,
    pub max_pixels: Option<u64>,
    pub precision: Option<String>,
    pub k: Option<usize>,
    pub cutoff: Option<usize>,
    pub seed: Option<u64>,
    pub fixtures: Option<String>,
    pub fixtures_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Dimension of the built-in deterministic provider used when no
    /// endpoint is configured.
    pub hash_dim: Option<usize>,
    /// Descriptor of the remote provider behind `provider_endpoint`.
    pub provider: Option<DescriptorConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorConfig {
    pub name: String,
    pub modality: String,
    pub vector_mode: String,
    pub dimension: usize,
    #[serde(default)]
    pub normalizes: bool,
    pub max_pixels: Option<u64>,
    pub patch_size: Option<u32>,
}

impl DescriptorConfig {
    pub fn to_descriptor(&self) -> Result<ProviderDescriptor> {
        let modality = match self.modality.as_str() {
            "text" => Modality::Text,
            "image" => Modality::Image,
            "multimodal" => Modality::Multimodal,
            other => anyhow::bail!("unknown provider modality `{other}`"),
        };
        let vector_mode = match self.vector_mode.as_str() {
            "single" => VectorMode::Single,
            "multi" => VectorMode::Multi,
            other => anyhow::bail!("unknown vector mode `{other}`"),
        };
        Ok(ProviderDescriptor {
            name: self.name.clone(),
            modality,
            vector_mode,
            dimension: self.dimension,
            normalizes: self.normalizes,
            max_pixels: self.max_pixels,
            patch_size: self.patch_size,
        })
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Flag beats config file beats default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag beats config file; absent is allowed.
pub fn pick_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Parse a `FromStr` value that may come from the config file.
pub fn parse_from_file<T>(value: &str, what: &str) -> Result<T>
where
    T: std::str::FromStr<Err = String>,
{
    value
        .parse()
        .map_err(|e: String| anyhow::anyhow!("config {what}: {e}"))
}
