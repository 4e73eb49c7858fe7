//! Image sizing for vision providers: pixel-budget resizing and visual
//! token estimation.

use thiserror::Error;

use crate::repr::{ImageBlob, ImageFormat};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("failed to decode image: {0}")]
    Decode(#[from] image::ImageError),
    #[error("failed to encode image: {0}")]
    Encode(String),
}

/// Scale (w, h) down so that w'·h' ≤ budget, preserving aspect ratio and
/// never dropping a side below 1 pixel. Images already within budget are
/// returned unchanged; this never upscales.
pub fn resize_for_budget(width: u32, height: u32, budget: u64) -> (u32, u32) {
    let (w, h) = (width.max(1) as u64, height.max(1) as u64);
    if w * h <= budget {
        return (w as u32, h as u32);
    }
    let scale = (budget as f64 / (w * h) as f64).sqrt();
    let mut nw = ((w as f64 * scale).floor() as u64).max(1);
    let mut nh = ((h as f64 * scale).floor() as u64).max(1);
    // The min-1 clamp on one side can push the product back over budget for
    // extreme aspect ratios (e.g. 1×10^9 at budget 4); re-clamp the other.
    if nw * nh > budget {
        if nw <= nh {
            nh = (budget / nw).max(1);
        } else {
            nw = (budget / nh).max(1);
        }
    }
    (nw as u32, nh as u32)
}

/// Visual tokens consumed by a w×h image under a square patch grid:
/// ceil(w/patch) · ceil(h/patch).
pub fn estimate_visual_tokens(width: u32, height: u32, patch_size: u32) -> u64 {
    let p = patch_size.max(1) as u64;
    let w = width.max(1) as u64;
    let h = height.max(1) as u64;
    w.div_ceil(p) * h.div_ceil(p)
}

/// Decode just the dimensions of an encoded image.
pub fn image_dimensions(bytes: &[u8]) -> Result<(u32, u32), ImageError> {
    let img = image::load_from_memory(bytes)?;
    Ok((img.width(), img.height()))
}

/// Resize an encoded image to fit the pixel budget, re-encoding as PNG when
/// a resize is needed. Images already within budget pass through untouched
/// (bytes and format preserved).
pub fn resize_image_to_budget(blob: &ImageBlob, budget: u64) -> Result<ImageBlob, ImageError> {
    let img = image::load_from_memory(&blob.bytes)?;
    let (w, h) = (img.width(), img.height());
    let (nw, nh) = resize_for_budget(w, h, budget);
    if (nw, nh) == (w, h) {
        return Ok(blob.clone());
    }
    let resized = img.resize_exact(nw, nh, image::imageops::FilterType::Triangle);
    let mut out = Vec::new();
    resized
        .write_to(&mut std::io::Cursor::new(&mut out), image::ImageFormat::Png)
        .map_err(|e| ImageError::Encode(e.to_string()))?;
    Ok(ImageBlob {
        bytes: out,
        format: ImageFormat::Png,
    })
}
