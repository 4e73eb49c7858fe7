//! Figure caption storage: a tab-separated file mapping figure units to the
//! caption text a captioning model produced for them. One line per caption:
//! `doc_id <TAB> figure_unit_id <TAB> caption text`, UTF-8.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::diag::Diagnostics;

#[derive(Debug, Error)]
pub enum CaptionError {
    #[error("i/o error at `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Captions keyed by `(doc_id, figure_unit_id)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaptionSet {
    map: BTreeMap<(String, String), String>,
}

impl CaptionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        doc_id: impl Into<String>,
        unit_id: impl Into<String>,
        caption: impl Into<String>,
    ) {
        self.map
            .insert((doc_id.into(), unit_id.into()), caption.into());
    }

    pub fn get(&self, doc_id: &str, unit_id: &str) -> Option<&str> {
        self.map
            .get(&(doc_id.to_string(), unit_id.to_string()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Parse the TSV format. Lines with fewer than three fields or that are
    /// empty are skipped with a diagnostic; later duplicates win.
    pub fn from_tsv(content: &str) -> (Self, Diagnostics) {
        let mut set = Self::new();
        let mut diags = Diagnostics::new();
        for (lineno, line) in content.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.splitn(3, '\t');
            match (fields.next(), fields.next(), fields.next()) {
                (Some(doc), Some(unit), Some(caption)) if !doc.is_empty() && !unit.is_empty() => {
                    set.insert(doc, unit, caption);
                }
                _ => diags.note(format!(
                    "caption line {} is malformed (expected doc_id\\tunit_id\\tcaption); skipped",
                    lineno + 1
                )),
            }
        }
        (set, diags)
    }

    pub fn read_tsv(path: &Path) -> Result<(Self, Diagnostics), CaptionError> {
        let content = std::fs::read_to_string(path).map_err(|e| CaptionError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(Self::from_tsv(&content))
    }

    /// Serialize to the TSV format. Tabs and newlines inside captions are
    /// flattened to spaces so the line structure stays parseable.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((doc, unit), caption) in &self.map {
            let clean: String = caption
                .chars()
                .map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c })
                .collect();
            out.push_str(doc);
            out.push('\t');
            out.push_str(unit);
            out.push('\t');
            out.push_str(&clean);
            out.push('\n');
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<(), CaptionError> {
        std::fs::write(path, self.to_tsv()).map_err(|e| CaptionError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}
