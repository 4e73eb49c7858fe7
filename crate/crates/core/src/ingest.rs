//! End-to-end document ingestion: flatten, normalize, extract structure, and
//! resolve assets, collecting diagnostics along the way. Also provides the
//! on-disk layout used between the `ingest` and `index` CLI steps.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostics;
use crate::latex::{
    extract_structure, flatten, normalize, resolve_assets, AssetResolution, ConverterCommand,
    DocumentStructure, FlatSource, FlattenError, FlattenOptions, LatexProject,
    NormalizationPolicy, NormalizeStats, PolicyError,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("i/o error at `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed stored document at `{path}`: {message}")]
    Malformed { path: String, message: String },
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub flatten: FlattenOptions,
    pub policy: NormalizationPolicy,
    pub converter: Option<ConverterCommand>,
}

/// A document after ingestion: everything downstream stages need.
#[derive(Debug, Clone)]
pub struct IngestedDocument {
    pub doc_id: String,
    pub flat: FlatSource,
    pub normalized: String,
    pub stats: NormalizeStats,
    pub structure: DocumentStructure,
    pub assets: AssetResolution,
    pub diagnostics: Diagnostics,
}

pub fn ingest_project(
    project: &LatexProject,
    options: &IngestOptions,
) -> Result<IngestedDocument, IngestError> {
    let mut diagnostics = Diagnostics::new();
    let (flat, flatten_diags) = flatten(project, &options.flatten)?;
    diagnostics.absorb(flatten_diags);
    let (normalized, stats) = normalize(&flat.text, &options.policy)?;
    let (structure, structure_diags) = extract_structure(&flat, &normalized);
    diagnostics.absorb(structure_diags);
    let (assets, asset_diags) = resolve_assets(project, &structure, options.converter.as_ref());
    diagnostics.absorb(asset_diags);
    Ok(IngestedDocument {
        doc_id: project.doc_id().to_string(),
        flat,
        normalized,
        stats,
        structure,
        assets,
        diagnostics,
    })
}

/// Sidecar metadata stored next to the text files of an ingested document.
#[derive(Debug, Serialize, Deserialize)]
struct StoredDoc {
    doc_id: String,
    origin_map: Vec<crate::latex::OriginSpan>,
    stats: NormalizeStats,
    structure: DocumentStructure,
    assets: AssetResolution,
    /// File name under `assets/` for each entry of `assets.resolved`.
    asset_files: Vec<String>,
    diagnostics: Diagnostics,
}

/// Write an ingested document under `dir/<doc_id>/`: `flat.tex`,
/// `normalized.txt`, `doc.json`, and resolved asset bytes under `assets/`.
/// The layout is deterministic: identical inputs produce identical trees.
pub fn save_ingested(doc: &IngestedDocument, dir: &Path) -> Result<(), IngestError> {
    let doc_dir = dir.join(&doc.doc_id);
    let write = |path: &Path, bytes: &[u8]| -> Result<(), IngestError> {
        std::fs::write(path, bytes).map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    let mkdir = |path: &Path| -> Result<(), IngestError> {
        std::fs::create_dir_all(path).map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    mkdir(&doc_dir)?;
    write(&doc_dir.join("flat.tex"), doc.flat.text.as_bytes())?;
    write(&doc_dir.join("normalized.txt"), doc.normalized.as_bytes())?;

    let mut asset_files = Vec::new();
    if !doc.assets.resolved.is_empty() {
        let asset_dir = doc_dir.join("assets");
        mkdir(&asset_dir)?;
        for asset in &doc.assets.resolved {
            let name = format!(
                "fig-{:03}-{}.{}",
                asset.figure_index,
                asset.asset_index,
                asset.format.extension()
            );
            write(&asset_dir.join(&name), &asset.bytes)?;
            asset_files.push(name);
        }
    }

    let stored = StoredDoc {
        doc_id: doc.doc_id.clone(),
        origin_map: doc.flat.origin_map.clone(),
        stats: doc.stats,
        structure: doc.structure.clone(),
        assets: doc.assets.clone(),
        asset_files,
        diagnostics: doc.diagnostics.clone(),
    };
    let json = serde_json::to_vec_pretty(&stored).expect("stored doc serializes");
    write(&doc_dir.join("doc.json"), &json)
}

/// Load one document previously written by [`save_ingested`].
pub fn load_ingested(doc_dir: &Path) -> Result<IngestedDocument, IngestError> {
    let read = |path: &Path| -> Result<Vec<u8>, IngestError> {
        std::fs::read(path).map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    let flat_text = String::from_utf8_lossy(&read(&doc_dir.join("flat.tex"))?).into_owned();
    let normalized = String::from_utf8_lossy(&read(&doc_dir.join("normalized.txt"))?).into_owned();
    let json = read(&doc_dir.join("doc.json"))?;
    let stored: StoredDoc =
        serde_json::from_slice(&json).map_err(|e| IngestError::Malformed {
            path: doc_dir.display().to_string(),
            message: e.to_string(),
        })?;
    if stored.asset_files.len() != stored.assets.resolved.len() {
        return Err(IngestError::Malformed {
            path: doc_dir.display().to_string(),
            message: "asset file list does not match resolved asset records".into(),
        });
    }
    let mut assets = stored.assets;
    for (asset, name) in assets.resolved.iter_mut().zip(&stored.asset_files) {
        asset.bytes = read(&doc_dir.join("assets").join(name))?;
    }
    Ok(IngestedDocument {
        doc_id: stored.doc_id,
        flat: FlatSource {
            text: flat_text,
            origin_map: stored.origin_map,
        },
        normalized,
        stats: stored.stats,
        structure: stored.structure,
        assets,
        diagnostics: stored.diagnostics,
    })
}

/// Load every document under an ingest output directory, sorted by doc id.
pub fn load_ingested_corpus(dir: &Path) -> Result<Vec<IngestedDocument>, IngestError> {
    let mut docs = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| IngestError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut dirs: Vec<_> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    dirs.sort();
    for doc_dir in dirs {
        docs.push(load_ingested(&doc_dir)?);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sample_project() -> LatexProject {
        let files: BTreeMap<String, String> = [
            (
                "main.tex".to_string(),
                "\\documentclass{article}\n\\begin{document}\n\\section{One}\nIntro text \\cite{x}.\n\\input{fig}\n\\end{document}\n"
                    .to_string(),
            ),
            (
                "fig.tex".to_string(),
                "\\begin{figure}\\includegraphics{plot}\\caption{A \\emph{plot}}\\label{fig:p}\\end{figure}\n"
                    .to_string(),
            ),
        ]
        .into_iter()
        .collect();
        let assets = [("plot.png".to_string(), b"not-really-png".to_vec())]
            .into_iter()
            .collect();
        LatexProject::new("doc-1", "main.tex", files, assets).unwrap()
    }

    #[test]
    fn full_pipeline_produces_consistent_document() {
        let doc = ingest_project(&sample_project(), &IngestOptions::default()).unwrap();
        assert!(doc.normalized.contains("Intro text ."));
        assert!(!doc.normalized.contains("\\cite"));
        assert!(!doc.normalized.contains("\\emph"));
        assert_eq!(doc.structure.figures.len(), 1);
        assert_eq!(doc.structure.figures[0].caption.as_deref(), Some("A plot"));
        assert_eq!(doc.structure.figures[0].label.as_deref(), Some("fig:p"));
        assert_eq!(doc.assets.resolved.len(), 1);
        assert_eq!(doc.assets.resolved[0].resolved_path, "plot.png");
    }

    #[test]
    fn disk_round_trip_preserves_document() {
        let doc = ingest_project(&sample_project(), &IngestOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ingested(&doc, dir.path()).unwrap();
        let loaded = load_ingested(&dir.path().join("doc-1")).unwrap();
        assert_eq!(loaded.doc_id, doc.doc_id);
        assert_eq!(loaded.flat, doc.flat);
        assert_eq!(loaded.normalized, doc.normalized);
        assert_eq!(loaded.stats, doc.stats);
        assert_eq!(loaded.structure, doc.structure);
        assert_eq!(loaded.assets, doc.assets);
        assert_eq!(loaded.assets.resolved[0].bytes, b"not-really-png");

        let corpus = load_ingested_corpus(dir.path()).unwrap();
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn save_is_deterministic() {
        let doc = ingest_project(&sample_project(), &IngestOptions::default()).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        save_ingested(&doc, dir_a.path()).unwrap();
        save_ingested(&doc, dir_b.path()).unwrap();
        for file in ["flat.tex", "normalized.txt", "doc.json"] {
            let a = std::fs::read(dir_a.path().join("doc-1").join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join("doc-1").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between runs");
        }
    }
}
