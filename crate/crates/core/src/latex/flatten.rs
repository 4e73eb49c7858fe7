//! Include expansion: resolve `\input`/`\include` recursively into a single
//! flat source, in textual order, with an origin map tying every output span
//! back to the file bytes it came from.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostics;
use crate::latex::project::LatexProject;

static INCLUDE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\(input|include)\s*\{([^{}%\n]*)\}").expect("static regex compiles")
});

#[derive(Debug, Error)]
pub enum FlattenError {
    #[error("include cycle: {}", cycle.join(" -> "))]
    IncludeCycle { cycle: Vec<String> },
    #[error("missing include `{target}` referenced from `{referenced_from}`")]
    MissingInclude {
        target: String,
        referenced_from: String,
    },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FlattenOptions {
    /// When set, a missing include target is replaced by nothing and recorded
    /// as a diagnostic instead of failing the document.
    pub lenient: bool,
}

/// Where a span of flattened output came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanOrigin {
    /// Bytes `start..end` of the named source file.
    File {
        path: String,
        start: usize,
        end: usize,
    },
    /// A synthetic newline inserted around `\include` expansions; present in
    /// no source file.
    Padding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginSpan {
    pub out_start: usize,
    pub out_end: usize,
    pub origin: SpanOrigin,
}

/// A fully expanded source plus provenance for every output byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatSource {
    pub text: String,
    pub origin_map: Vec<OriginSpan>,
}

impl FlatSource {
    /// Rebuild the flat text from the origin map and the project's files.
    /// Used by tests to check that provenance is exact.
    pub fn reconstruct(&self, project: &LatexProject) -> Option<String> {
        let mut out = String::new();
        for span in &self.origin_map {
            match &span.origin {
                SpanOrigin::File { path, start, end } => {
                    out.push_str(project.file(path)?.get(*start..*end)?);
                }
                SpanOrigin::Padding => out.push_str(&self.text[span.out_start..span.out_end]),
            }
        }
        Some(out)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum IncludeKind {
    Input,
    Include,
}

struct Expansion<'p> {
    project: &'p LatexProject,
    options: FlattenOptions,
    out: String,
    spans: Vec<OriginSpan>,
    stack: Vec<String>,
    diags: Diagnostics,
}

pub fn flatten(
    project: &LatexProject,
    options: &FlattenOptions,
) -> Result<(FlatSource, Diagnostics), FlattenError> {
    let mut exp = Expansion {
        project,
        options: *options,
        out: String::new(),
        spans: Vec::new(),
        stack: Vec::new(),
        diags: Diagnostics::new(),
    };
    exp.expand(project.root_file())?;
    Ok((
        FlatSource {
            text: exp.out,
            origin_map: exp.spans,
        },
        exp.diags,
    ))
}

impl Expansion<'_> {
    fn expand(&mut self, file: &str) -> Result<(), FlattenError> {
        if let Some(pos) = self.stack.iter().position(|f| f == file) {
            let mut cycle: Vec<String> = self.stack[pos..].to_vec();
            cycle.push(file.to_string());
            return Err(FlattenError::IncludeCycle { cycle });
        }
        self.stack.push(file.to_string());
        let content = self
            .project
            .file(file)
            .expect("expand is only called for files known to exist");

        let mut cursor = 0usize;
        for (range, kind, target) in include_sites(content) {
            self.emit_file_span(file, content, cursor, range.0);
            cursor = range.1;
            match self.resolve(&target) {
                Some(resolved) => {
                    if kind == IncludeKind::Include {
                        self.emit_padding();
                    }
                    self.expand(&resolved)?;
                    if kind == IncludeKind::Include {
                        self.emit_padding();
                    }
                }
                None => {
                    if self.options.lenient {
                        self.diags
                            .note(format!("missing include `{target}` in `{file}`; skipped"));
                    } else {
                        return Err(FlattenError::MissingInclude {
                            target,
                            referenced_from: file.to_string(),
                        });
                    }
                }
            }
        }
        self.emit_file_span(file, content, cursor, content.len());
        self.stack.pop();
        Ok(())
    }

    fn resolve(&self, target: &str) -> Option<String> {
        let name = target.trim();
        [name.to_string(), format!("{name}.tex")]
            .into_iter()
            .find(|candidate| self.project.file(candidate).is_some())
    }

    fn emit_file_span(&mut self, file: &str, content: &str, start: usize, end: usize) {
        if start == end {
            return;
        }
        let out_start = self.out.len();
        self.out.push_str(&content[start..end]);
        self.spans.push(OriginSpan {
            out_start,
            out_end: self.out.len(),
            origin: SpanOrigin::File {
                path: file.to_string(),
                start,
                end,
            },
        });
    }

    fn emit_padding(&mut self) {
        let out_start = self.out.len();
        self.out.push('\n');
        self.spans.push(OriginSpan {
            out_start,
            out_end: self.out.len(),
            origin: SpanOrigin::Padding,
        });
    }
}

/// All `\input`/`\include` sites in a file, in textual order, skipping any
/// that sit inside a `%` comment (as TeX itself would).
fn include_sites(content: &str) -> Vec<((usize, usize), IncludeKind, String)> {
    let mut sites = Vec::new();
    let mut line_start = 0usize;
    for line in content.split_inclusive('\n') {
        let scan_end = comment_start(line).unwrap_or(line.len());
        for m in INCLUDE_RE.captures_iter(&line[..scan_end]) {
            let whole = m.get(0).expect("group 0 always present");
            let kind = match &m[1] {
                "input" => IncludeKind::Input,
                _ => IncludeKind::Include,
            };
            sites.push((
                (line_start + whole.start(), line_start + whole.end()),
                kind,
                m[2].to_string(),
            ));
        }
        line_start += line.len();
    }
    sites
}

/// Byte offset of the first comment-starting `%` in a line, honoring `\%`
/// escapes (a backslash escapes the character after it).
pub(crate) fn comment_start(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'%' => return Some(i),
            _ => i += 1,
        }
    }
    None
}
