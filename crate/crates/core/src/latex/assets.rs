//! Graphics asset resolution: map `\includegraphics` references to project
//! files (inferring extensions the way LaTeX does) and hand vector formats to
//! an external converter so every embeddable asset ends up raster.

use std::io::Write;
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostics;
use crate::latex::project::{normalize_rel_path, LatexProject};
use crate::latex::structure::DocumentStructure;

/// Extension candidates tried after an as-given lookup fails.
const INFERRED_EXTENSIONS: &[&str] = &["png", "jpg", "pdf", "eps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetFormat {
    Png,
    Jpg,
    Pdf,
    Eps,
}

impl AssetFormat {
    pub fn from_path(path: &str) -> Option<Self> {
        let ext = path.rsplit('.').next()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(Self::Png),
            "jpg" | "jpeg" => Some(Self::Jpg),
            "pdf" => Some(Self::Pdf),
            "eps" => Some(Self::Eps),
            _ => None,
        }
    }

    pub fn is_raster(self) -> bool {
        matches!(self, Self::Png | Self::Jpg)
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Png => "png",
            Self::Jpg => "jpg",
            Self::Pdf => "pdf",
            Self::Eps => "eps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedAsset {
    pub figure_index: usize,
    pub asset_index: usize,
    pub ref_path: String,
    pub resolved_path: String,
    pub format: AssetFormat,
    /// Still in a vector format that no converter has processed.
    pub needs_conversion: bool,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingAsset {
    pub figure_index: usize,
    pub asset_index: usize,
    pub ref_path: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetResolution {
    pub resolved: Vec<ResolvedAsset>,
    pub missing: Vec<MissingAsset>,
}

impl AssetResolution {
    pub fn for_figure(&self, figure_index: usize) -> impl Iterator<Item = &ResolvedAsset> {
        self.resolved
            .iter()
            .filter(move |a| a.figure_index == figure_index)
    }
}

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("converter template must contain both {{in}} and {{out}}: `{0}`")]
    BadTemplate(String),
    #[error("converter command failed: {0}")]
    Converter(String),
    #[error("i/o error during conversion: {0}")]
    Io(#[from] std::io::Error),
}

/// An external raster converter invoked as a command template, e.g.
/// `magick {in} {out}` or `gs -sDEVICE=png16m -o {out} {in}`. The command
/// must exit 0 and write the output file.
#[derive(Debug, Clone)]
pub struct ConverterCommand {
    template: String,
}

impl ConverterCommand {
    pub fn new(template: impl Into<String>) -> Result<Self, AssetError> {
        let template = template.into();
        if !template.contains("{in}") || !template.contains("{out}") {
            return Err(AssetError::BadTemplate(template));
        }
        Ok(Self { template })
    }

    /// Convert `input` (with the given source extension) to PNG bytes.
    pub fn convert(&self, input: &[u8], input_ext: &str) -> Result<Vec<u8>, AssetError> {
        let dir = tempfile::tempdir()?;
        let in_path = dir.path().join(format!("asset.{input_ext}"));
        let out_path = dir.path().join("asset.png");
        std::fs::File::create(&in_path)?.write_all(input)?;

        let parts: Vec<String> = self
            .template
            .split_whitespace()
            .map(|tok| match tok {
                "{in}" => in_path.display().to_string(),
                "{out}" => out_path.display().to_string(),
                other => other.to_string(),
            })
            .collect();
        let output = Command::new(&parts[0])
            .args(&parts[1..])
            .output()
            .map_err(|e| AssetError::Converter(format!("failed to spawn `{}`: {e}", parts[0])))?;
        if !output.status.success() {
            return Err(AssetError::Converter(format!(
                "`{}` exited with {}: {}",
                self.template,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        std::fs::read(&out_path).map_err(|e| {
            AssetError::Converter(format!("converter wrote no output file: {e}"))
        })
    }
}

/// Resolve every figure's graphics references against the project's assets.
/// Misses are recorded, never fatal: the figure is simply not embeddable.
pub fn resolve_assets(
    project: &LatexProject,
    structure: &DocumentStructure,
    converter: Option<&ConverterCommand>,
) -> (AssetResolution, Diagnostics) {
    let mut out = AssetResolution::default();
    let mut diags = Diagnostics::new();
    for figure in &structure.figures {
        for (asset_index, ref_path) in figure.asset_refs.iter().enumerate() {
            let Some(resolved_path) = resolve_ref(project, ref_path) else {
                diags.note(format!(
                    "figure {}: asset `{ref_path}` not found in project",
                    figure.index
                ));
                out.missing.push(MissingAsset {
                    figure_index: figure.index,
                    asset_index,
                    ref_path: ref_path.clone(),
                });
                continue;
            };
            let Some(format) = AssetFormat::from_path(&resolved_path) else {
                diags.note(format!(
                    "figure {}: asset `{resolved_path}` has an unsupported format",
                    figure.index
                ));
                out.missing.push(MissingAsset {
                    figure_index: figure.index,
                    asset_index,
                    ref_path: ref_path.clone(),
                });
                continue;
            };
            let bytes = project
                .asset(&resolved_path)
                .expect("resolve_ref only returns existing assets")
                .to_vec();
            let mut asset = ResolvedAsset {
                figure_index: figure.index,
                asset_index,
                ref_path: ref_path.clone(),
                resolved_path,
                format,
                needs_conversion: !format.is_raster(),
                bytes,
            };
            if asset.needs_conversion {
                if let Some(conv) = converter {
                    match conv.convert(&asset.bytes, format.extension()) {
                        Ok(png) => {
                            asset.bytes = png;
                            asset.format = AssetFormat::Png;
                            asset.needs_conversion = false;
                        }
                        Err(e) => diags.note(format!(
                            "figure {}: conversion of `{}` failed: {e}",
                            figure.index, asset.resolved_path
                        )),
                    }
                } else {
                    diags.note(format!(
                        "figure {}: `{}` needs conversion but no converter is configured",
                        figure.index, asset.resolved_path
                    ));
                }
            }
            out.resolved.push(asset);
        }
    }
    (out, diags)
}

fn resolve_ref(project: &LatexProject, ref_path: &str) -> Option<String> {
    let base = normalize_rel_path(ref_path.trim()).ok()?;
    if project.asset(&base).is_some() {
        return Some(base);
    }
    for ext in INFERRED_EXTENSIONS {
        let candidate = format!("{base}.{ext}");
        if project.asset(&candidate).is_some() {
            return Some(candidate);
        }
    }
    None
}
