//! A deterministic local embedding provider: bag-of-words token hashing for
//! text and seeded pseudo-vectors for images. No network, no model weights,
//! bit-identical across runs and platforms — the workhorse for tests,
//! offline pipelines, and end-to-end determinism checks.

use crate::embed::pixels::{estimate_visual_tokens, image_dimensions, resize_for_budget};
use crate::embed::{
    EmbedInput, Embedding, EmbeddingProvider, Modality, ProviderDescriptor, ProviderError,
    VectorMode,
};

/// FNV-1a, 64-bit. Stable across platforms and releases, unlike the std
/// hasher.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hash each whitespace token into one of `dimension` buckets, count, and
/// L2-normalize. Empty (or all-whitespace) text yields the zero vector,
/// which downstream scoring treats as "matches nothing".
pub fn hash_embed(text: &str, dimension: usize) -> Vec<f32> {
    let mut counts = vec![0.0f32; dimension];
    for token in text.split_whitespace() {
        let bucket = (fnv1a64(token.as_bytes()) % dimension as u64) as usize;
        counts[bucket] += 1.0;
    }
    l2_normalize(&mut counts);
    counts
}

/// The bucket a token lands in; exposed so tests can build collision-free
/// vocabularies.
pub fn token_bucket(token: &str, dimension: usize) -> usize {
    (fnv1a64(token.as_bytes()) % dimension as u64) as usize
}

fn l2_normalize(v: &mut [f32]) {
    let norm = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x = (*x as f64 / norm) as f32;
        }
    }
}

/// splitmix64: cheap, well-distributed stream from a seed.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A unit-norm pseudo-vector derived from a seed.
fn seeded_vector(seed: u64, dimension: usize) -> Vec<f32> {
    let mut state = seed;
    let mut v: Vec<f32> = (0..dimension)
        .map(|_| {
            // Map to [-1, 1).
            (splitmix64(&mut state) >> 11) as f32 / (1u64 << 52) as f32 - 1.0
        })
        .collect();
    l2_normalize(&mut v);
    v
}

#[derive(Debug, Clone)]
pub struct HashProvider {
    descriptor: ProviderDescriptor,
}

impl HashProvider {
    /// Single-vector text provider.
    pub fn text_single(dimension: usize) -> Self {
        Self {
            descriptor: ProviderDescriptor {
                name: "hash-text".into(),
                modality: Modality::Text,
                vector_mode: VectorMode::Single,
                dimension,
                normalizes: true,
                max_pixels: None,
                patch_size: None,
            },
        }
    }

    /// Multi-vector text provider: one bucket-indicator row per token, so
    /// the row count equals the token count.
    pub fn text_multi(dimension: usize) -> Self {
        Self {
            descriptor: ProviderDescriptor {
                name: "hash-text-multi".into(),
                modality: Modality::Text,
                vector_mode: VectorMode::Multi,
                dimension,
                normalizes: true,
                max_pixels: None,
                patch_size: None,
            },
        }
    }

    /// Single-vector provider accepting text, images, or both.
    pub fn multimodal_single(dimension: usize, max_pixels: u64, patch_size: u32) -> Self {
        Self {
            descriptor: ProviderDescriptor {
                name: "hash-mm".into(),
                modality: Modality::Multimodal,
                vector_mode: VectorMode::Single,
                dimension,
                normalizes: true,
                max_pixels: Some(max_pixels),
                patch_size: Some(patch_size),
            },
        }
    }

    /// Multi-vector multimodal provider: token rows for text plus one row
    /// per estimated visual token for each image.
    pub fn multimodal_multi(dimension: usize, max_pixels: u64, patch_size: u32) -> Self {
        Self {
            descriptor: ProviderDescriptor {
                name: "hash-mm-multi".into(),
                modality: Modality::Multimodal,
                vector_mode: VectorMode::Multi,
                dimension,
                normalizes: true,
                max_pixels: Some(max_pixels),
                patch_size: Some(patch_size),
            },
        }
    }

    fn dim(&self) -> usize {
        self.descriptor.dimension
    }

    /// Rows contributed by one image in multi mode: its estimated visual
    /// token count after budget resizing, each row seeded from the bytes.
    fn image_rows(&self, bytes: &[u8]) -> Result<Vec<Vec<f32>>, ProviderError> {
        let patch = self.descriptor.patch_size.unwrap_or(14);
        let (w, h) = image_dimensions(bytes)
            .map_err(|e| ProviderError::MalformedResponse(format!("undecodable image: {e}")))?;
        let (w, h) = match self.descriptor.max_pixels {
            Some(budget) => resize_for_budget(w, h, budget),
            None => (w, h),
        };
        let n = estimate_visual_tokens(w, h, patch) as usize;
        let seed = fnv1a64(bytes);
        Ok((0..n)
            .map(|r| seeded_vector(seed ^ (r as u64).wrapping_mul(0x9e37), self.dim()))
            .collect())
    }

    fn embed_one(&self, input: &EmbedInput) -> Result<Embedding, ProviderError> {
        match self.descriptor.vector_mode {
            VectorMode::Single => {
                let mut acc = vec![0.0f32; self.dim()];
                if let Some(text) = &input.text {
                    for (i, x) in hash_embed(text, self.dim()).iter().enumerate() {
                        acc[i] += x;
                    }
                }
                for image in &input.images {
                    let v = seeded_vector(fnv1a64(&image.bytes), self.dim());
                    for (i, x) in v.iter().enumerate() {
                        acc[i] += x;
                    }
                }
                l2_normalize(&mut acc);
                Ok(Embedding::single(acc))
            }
            VectorMode::Multi => {
                let mut rows: Vec<Vec<f32>> = Vec::new();
                if let Some(text) = &input.text {
                    for token in text.split_whitespace() {
                        let mut row = vec![0.0f32; self.dim()];
                        row[token_bucket(token, self.dim())] = 1.0;
                        rows.push(row);
                    }
                }
                for image in &input.images {
                    rows.extend(self.image_rows(&image.bytes)?);
                }
                Embedding::from_rows(rows, self.dim())
                    .map_err(|e| ProviderError::MalformedResponse(e.to_string()))
            }
        }
    }
}

impl EmbeddingProvider for HashProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn embed_batch(&self, inputs: &[EmbedInput]) -> Result<Vec<Embedding>, ProviderError> {
        inputs.iter().map(|input| self.embed_one(input)).collect()
    }
}
