//! In-memory model of a LaTeX source project and loaders for the two corpus
//! layouts we accept: one subdirectory per document, or one gzip tarball per
//! document (the layout arXiv source dumps use).

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Component, Path};

use thiserror::Error;

/// Extensions treated as text sources (kept as UTF-8 strings). Everything
/// else is carried as opaque asset bytes.
const TEXT_EXTENSIONS: &[&str] = &["tex", "sty", "cls", "bbl", "bib", "clo", "def"];

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("project `{0}` contains no files")]
    Empty(String),
    #[error("root file `{root}` not found in project `{doc_id}`")]
    RootMissing { doc_id: String, root: String },
    #[error("no file with \\documentclass found in project `{0}`")]
    NoRootCandidate(String),
    #[error("path `{0}` escapes the project root")]
    PathEscapes(String),
    #[error("i/o error reading `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("archive error in `{path}`: {message}")]
    Archive { path: String, message: String },
}

/// A self-contained LaTeX project: text sources plus binary assets, all keyed
/// by forward-slash paths relative to the project root.
#[derive(Debug, Clone)]
pub struct LatexProject {
    doc_id: String,
    root_file: String,
    files: BTreeMap<String, String>,
    assets: BTreeMap<String, Vec<u8>>,
}

impl LatexProject {
    pub fn new(
        doc_id: impl Into<String>,
        root_file: impl Into<String>,
        files: BTreeMap<String, String>,
        assets: BTreeMap<String, Vec<u8>>,
    ) -> Result<Self, ProjectError> {
        let doc_id = doc_id.into();
        if files.is_empty() {
            return Err(ProjectError::Empty(doc_id));
        }
        let mut norm_files = BTreeMap::new();
        for (path, content) in files {
            norm_files.insert(normalize_rel_path(&path)?, content);
        }
        let mut norm_assets = BTreeMap::new();
        for (path, bytes) in assets {
            norm_assets.insert(normalize_rel_path(&path)?, bytes);
        }
        let root_file = normalize_rel_path(&root_file.into())?;
        if !norm_files.contains_key(&root_file) {
            return Err(ProjectError::RootMissing {
                doc_id,
                root: root_file,
            });
        }
        Ok(Self {
            doc_id,
            root_file,
            files: norm_files,
            assets: norm_assets,
        })
    }

    /// Convenience constructor for a single-file project.
    pub fn single(doc_id: impl Into<String>, source: impl Into<String>) -> Self {
        let mut files = BTreeMap::new();
        files.insert("main.tex".to_string(), source.into());
        Self::new(doc_id, "main.tex", files, BTreeMap::new())
            .expect("single-file project is always valid")
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn root_file(&self) -> &str {
        &self.root_file
    }

    pub fn file(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(String::as_str)
    }

    pub fn files(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn asset(&self, path: &str) -> Option<&[u8]> {
        self.assets.get(path).map(Vec::as_slice)
    }

    pub fn asset_paths(&self) -> impl Iterator<Item = &str> {
        self.assets.keys().map(String::as_str)
    }

    /// Load a project from a directory tree. The main file is detected by
    /// scanning for `\documentclass`.
    pub fn from_dir(doc_id: impl Into<String>, dir: &Path) -> Result<Self, ProjectError> {
        let doc_id = doc_id.into();
        let mut files = BTreeMap::new();
        let mut assets = BTreeMap::new();
        for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
            let entry = entry.map_err(|e| ProjectError::Archive {
                path: dir.display().to_string(),
                message: e.to_string(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(dir)
                .expect("walkdir yields paths under its root")
                .to_string_lossy()
                .replace('\\', "/");
            let bytes = std::fs::read(entry.path()).map_err(|e| ProjectError::Io {
                path: rel.clone(),
                source: e,
            })?;
            store_entry(&mut files, &mut assets, rel, bytes);
        }
        Self::assemble(doc_id, files, assets)
    }

    /// Load a project from a `.tar.gz` archive laid out like an arXiv source
    /// dump (files at the archive root or under one top-level directory).
    pub fn from_tar_gz(doc_id: impl Into<String>, archive: &Path) -> Result<Self, ProjectError> {
        let doc_id = doc_id.into();
        let file = std::fs::File::open(archive).map_err(|e| ProjectError::Io {
            path: archive.display().to_string(),
            source: e,
        })?;
        let mut tar = tar::Archive::new(flate2::read::GzDecoder::new(file));
        let mut files = BTreeMap::new();
        let mut assets = BTreeMap::new();
        let entries = tar.entries().map_err(|e| ProjectError::Archive {
            path: archive.display().to_string(),
            message: e.to_string(),
        })?;
        for entry in entries {
            let mut entry = entry.map_err(|e| ProjectError::Archive {
                path: archive.display().to_string(),
                message: e.to_string(),
            })?;
            if !entry.header().entry_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .map_err(|e| ProjectError::Archive {
                    path: archive.display().to_string(),
                    message: e.to_string(),
                })?
                .to_string_lossy()
                .into_owned();
            let mut bytes = Vec::new();
            entry.read_to_end(&mut bytes).map_err(|e| ProjectError::Io {
                path: rel.clone(),
                source: e,
            })?;
            store_entry(&mut files, &mut assets, rel, bytes);
        }
        Self::assemble(doc_id, files, assets)
    }

    fn assemble(
        doc_id: String,
        files: BTreeMap<String, String>,
        assets: BTreeMap<String, Vec<u8>>,
    ) -> Result<Self, ProjectError> {
        if files.is_empty() {
            return Err(ProjectError::Empty(doc_id));
        }
        let root = detect_root(&files).ok_or_else(|| ProjectError::NoRootCandidate(doc_id.clone()))?;
        Self::new(doc_id, root, files, assets)
    }
}

fn store_entry(
    files: &mut BTreeMap<String, String>,
    assets: &mut BTreeMap<String, Vec<u8>>,
    rel: String,
    bytes: Vec<u8>,
) {
    let ext = Path::new(&rel)
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    if TEXT_EXTENSIONS.contains(&ext.as_str()) {
        files.insert(rel, String::from_utf8_lossy(&bytes).into_owned());
    } else {
        assets.insert(rel, bytes);
    }
}

/// Pick the main file: prefer `.tex` files containing `\documentclass`,
/// shallower paths first, then conventional names, then lexicographic order.
fn detect_root(files: &BTreeMap<String, String>) -> Option<String> {
    let mut candidates: Vec<&String> = files
        .iter()
        .filter(|(path, content)| path.ends_with(".tex") && content.contains("\\documentclass"))
        .map(|(path, _)| path)
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let preferred = ["main.tex", "paper.tex", "ms.tex", "root.tex"];
    candidates.sort_by_key(|path| {
        let depth = path.matches('/').count();
        let name = path.rsplit('/').next().unwrap_or(path);
        let name_rank = preferred
            .iter()
            .position(|p| *p == name)
            .unwrap_or(preferred.len());
        (depth, name_rank, (*path).clone())
    });
    Some(candidates[0].clone())
}

/// Normalize a project-relative path: forward slashes, no `.` segments, and
/// no escaping the root via `..` or absolute components.
pub(crate) fn normalize_rel_path(path: &str) -> Result<String, ProjectError> {
    let slashed = path.replace('\\', "/");
    let mut parts = Vec::new();
    for comp in Path::new(&slashed).components() {
        match comp {
            Component::Normal(c) => parts.push(c.to_string_lossy().into_owned()),
            Component::CurDir => {}
            Component::ParentDir | Component::RootDir | Component::Prefix(_) => {
                return Err(ProjectError::PathEscapes(path.to_string()))
            }
        }
    }
    if parts.is_empty() {
        return Err(ProjectError::PathEscapes(path.to_string()));
    }
    Ok(parts.join("/"))
}

/// Load every document in a corpus directory. Subdirectories and `.tar.gz`
/// archives become one project each; per-document failures are isolated so a
/// bad archive does not sink the rest of the corpus.
pub struct CorpusLoad {
    pub projects: Vec<LatexProject>,
    pub failures: Vec<(String, ProjectError)>,
}

pub fn load_corpus(dir: &Path) -> Result<CorpusLoad, ProjectError> {
    let mut projects = Vec::new();
    let mut failures = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| ProjectError::Io {
            path: dir.display().to_string(),
            source: e,
        })?
        .filter_map(Result::ok)
        .collect();
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if path.is_dir() {
            match LatexProject::from_dir(name.clone(), &path) {
                Ok(p) => projects.push(p),
                Err(e) => failures.push((name, e)),
            }
        } else if name.ends_with(".tar.gz") {
            let doc_id = name.trim_end_matches(".tar.gz").to_string();
            match LatexProject::from_tar_gz(doc_id.clone(), &path) {
                Ok(p) => projects.push(p),
                Err(e) => failures.push((doc_id, e)),
            }
        }
    }
    projects.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(CorpusLoad { projects, failures })
}
