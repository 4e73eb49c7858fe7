//! Structural markers extracted from a normalized document: figure and table
//! environments (with captions and graphics references) and section
//! boundaries. Anchors are byte offsets into the normalized text, which is
//! what chunking later operates on.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::diag::Diagnostics;
use crate::latex::flatten::{comment_start, FlatSource};

static ENV_BEGIN_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\begin\{(figure\*?|table\*?)\}").expect("static regex compiles")
});
static GRAPHICS_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\includegraphics\s*(?:\[[^\]]*\])?\s*\{([^{}]*)\}").expect("static regex compiles")
});
static LABEL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\\label\s*\{([^{}]*)\}").expect("static regex compiles"));
static SECTION_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\\(sub)?section\*?\s*\{").expect("static regex compiles"));
static CAPTION_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\caption\s*(?:\[[^\]]*\])?\s*\{").expect("static regex compiles")
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionSpan {
    pub title: String,
    /// 1 for `\section`, 2 for `\subsection`.
    pub level: u8,
    /// Content span in the normalized text: from the end of the heading to
    /// the start of the next heading (or end of document).
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureBlock {
    pub index: usize,
    pub caption: Option<String>,
    /// `\includegraphics` targets in order of appearance.
    pub asset_refs: Vec<String>,
    /// Byte offset of `\begin{figure}` in the normalized text.
    pub anchor: usize,
    pub label: Option<String>,
    /// True when the figure embeds no graphics file (e.g. TikZ drawings).
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableBlock {
    pub index: usize,
    /// The environment body, kept verbatim.
    pub latex: String,
    /// Byte offset of `\begin{table}` in the normalized text.
    pub anchor: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentStructure {
    pub sections: Vec<SectionSpan>,
    pub figures: Vec<FigureBlock>,
    pub tables: Vec<TableBlock>,
}

pub fn extract_structure(flat: &FlatSource, normalized: &str) -> (DocumentStructure, Diagnostics) {
    let mut diags = Diagnostics::new();
    let mut structure = DocumentStructure::default();

    let mut cursor = 0usize;
    while let Some(m) = ENV_BEGIN_RE.find_at(normalized, cursor) {
        let env = &normalized[m.start() + 7..m.end() - 1];
        let end_needle = format!("\\end{{{env}}}");
        let Some(rel) = normalized[m.end()..].find(&end_needle) else {
            diags.note(format!(
                "unterminated \\begin{{{env}}} at offset {}; skipped",
                m.start()
            ));
            cursor = m.end();
            continue;
        };
        let body_end = m.end() + rel;
        let env_end = body_end + end_needle.len();
        let body = &normalized[m.end()..body_end];
        if env.starts_with("figure") {
            let caption = extract_caption(body, &mut diags, m.start());
            let asset_refs: Vec<String> = GRAPHICS_RE
                .captures_iter(body)
                .map(|c| c[1].trim().to_string())
                .collect();
            let synthetic = asset_refs.is_empty();
            structure.figures.push(FigureBlock {
                index: structure.figures.len(),
                caption,
                asset_refs,
                anchor: m.start(),
                label: None,
                synthetic,
            });
        } else {
            structure.tables.push(TableBlock {
                index: structure.tables.len(),
                latex: normalized[m.start()..env_end].to_string(),
                anchor: m.start(),
            });
        }
        cursor = env_end;
    }

    attach_figure_labels(flat, &mut structure, &mut diags);
    structure.sections = extract_sections(normalized);
    (structure, diags)
}

fn extract_caption(body: &str, diags: &mut Diagnostics, env_offset: usize) -> Option<String> {
    let mut captions = CAPTION_RE.captures_iter(body);
    let first = captions.next()?;
    let open = first.get(0).expect("group 0").end() - 1;
    let caption = match balanced_group(body.as_bytes(), open) {
        Some(close) => Some(body[open + 1..close - 1].trim().to_string()),
        None => {
            diags.note(format!(
                "unbalanced \\caption in environment at offset {env_offset}"
            ));
            None
        }
    };
    if captions.next().is_some() {
        diags.note(format!(
            "multiple \\caption commands in environment at offset {env_offset}; kept the first"
        ));
    }
    caption
}

/// Figure labels are stripped by normalization, so they are recovered from
/// the flat source: figure environments are matched up by order of
/// appearance (comments excluded).
fn attach_figure_labels(
    flat: &FlatSource,
    structure: &mut DocumentStructure,
    diags: &mut Diagnostics,
) {
    if structure.figures.is_empty() {
        return;
    }
    let decommented: String = flat
        .text
        .split_inclusive('\n')
        .map(|line| &line[..comment_start(line).unwrap_or(line.len())])
        .collect();
    let mut labels = Vec::new();
    let mut cursor = 0usize;
    while let Some(m) = ENV_BEGIN_RE.find_at(&decommented, cursor) {
        let env = &decommented[m.start() + 7..m.end() - 1];
        let end_needle = format!("\\end{{{env}}}");
        let Some(rel) = decommented[m.end()..].find(&end_needle) else {
            cursor = m.end();
            continue;
        };
        if env.starts_with("figure") {
            let body = &decommented[m.end()..m.end() + rel];
            labels.push(
                LABEL_RE
                    .captures(body)
                    .map(|c| c[1].trim().to_string()),
            );
        }
        cursor = m.end() + rel + end_needle.len();
    }
    if labels.len() == structure.figures.len() {
        for (figure, label) in structure.figures.iter_mut().zip(labels) {
            figure.label = label;
        }
    } else {
        diags.note(format!(
            "figure count mismatch between flat ({}) and normalized ({}) text; labels dropped",
            labels.len(),
            structure.figures.len()
        ));
    }
}

fn extract_sections(normalized: &str) -> Vec<SectionSpan> {
    let mut headings = Vec::new();
    for m in SECTION_RE.find_iter(normalized) {
        let open = m.end() - 1;
        let Some(close) = balanced_group(normalized.as_bytes(), open) else {
            continue;
        };
        let level = if normalized[m.start()..].starts_with("\\sub") {
            2
        } else {
            1
        };
        headings.push((
            m.start(),
            close,
            level,
            normalized[open + 1..close - 1].trim().to_string(),
        ));
    }
    let mut sections = Vec::new();
    for (idx, (_, heading_end, level, title)) in headings.iter().enumerate() {
        let end = headings
            .get(idx + 1)
            .map(|(next_start, ..)| *next_start)
            .unwrap_or(normalized.len());
        sections.push(SectionSpan {
            title: title.clone(),
            level: *level,
            start: *heading_end,
            end,
        });
    }
    sections
}

/// One past the close of the balanced `{...}` group opening at `open`.
fn balanced_group(bytes: &[u8], open: usize) -> Option<usize> {
    debug_assert_eq!(bytes.get(open), Some(&b'{'));
    let mut depth = 0isize;
    let mut i = open;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'{' => {
                depth += 1;
                i += 1;
            }
            b'}' => {
                depth -= 1;
                i += 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => i += 1,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_of(text: &str) -> FlatSource {
        use crate::latex::flatten::{flatten, FlattenOptions};
        use crate::latex::project::LatexProject;
        let p = LatexProject::single("d", text);
        flatten(&p, &FlattenOptions::default()).unwrap().0
    }

    fn extract(text: &str) -> (DocumentStructure, Diagnostics) {
        // In the real pipeline the text passed here is already normalized;
        // these fixtures avoid commands that normalization would change,
        // except where a test builds flat and normalized separately.
        extract_structure(&flat_of(text), text)
    }

    #[test]
    fn figure_with_caption_and_graphics() {
        let src = "\\begin{figure}\n\\includegraphics[width=\\linewidth]{plots/loss}\n\\caption{Training loss}\n\\end{figure}";
        let (s, diags) = extract(src);
        assert!(diags.is_empty());
        assert_eq!(s.figures.len(), 1);
        let fig = &s.figures[0];
        assert_eq!(fig.caption.as_deref(), Some("Training loss"));
        assert_eq!(fig.asset_refs, vec!["plots/loss"]);
        assert_eq!(fig.anchor, 0);
        assert!(!fig.synthetic);
    }

    #[test]
    fn starred_environments_and_multiple_graphics() {
        let src = "x \\begin{figure*}\\includegraphics{a.png}\\includegraphics{b.png}\\caption{Two}\\end{figure*} y";
        let (s, _) = extract(src);
        assert_eq!(s.figures.len(), 1);
        assert_eq!(s.figures[0].asset_refs, vec!["a.png", "b.png"]);
        assert_eq!(s.figures[0].anchor, 2);
    }

    #[test]
    fn tikz_figure_is_synthetic() {
        let src = "\\begin{figure}\\begin{tikzpicture}\\end{tikzpicture}\\caption{Drawn}\\end{figure}";
        let (s, _) = extract(src);
        assert!(s.figures[0].synthetic);
        assert!(s.figures[0].asset_refs.is_empty());
    }

    #[test]
    fn table_kept_verbatim() {
        let src = "before \\begin{table}\\begin{tabular}{ll}a&b\\\\\\end{tabular}\\end{table} after";
        let (s, _) = extract(src);
        assert_eq!(s.tables.len(), 1);
        assert_eq!(
            s.tables[0].latex,
            "\\begin{table}\\begin{tabular}{ll}a&b\\\\\\end{tabular}\\end{table}"
        );
        assert_eq!(s.tables[0].anchor, 7);
    }

    #[test]
    fn unterminated_environment_is_skipped_with_note() {
        let src = "\\begin{figure}\\caption{x} no end";
        let (s, diags) = extract(src);
        assert!(s.figures.is_empty());
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn first_caption_wins_with_note() {
        let src = "\\begin{figure}\\caption{first}\\caption{second}\\end{figure}";
        let (s, diags) = extract(src);
        assert_eq!(s.figures[0].caption.as_deref(), Some("first"));
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn caption_with_nested_braces_and_short_form() {
        let src = "\\begin{figure}\\caption[short]{Cost ${O(n^2)}$ shown}\\end{figure}";
        let (s, _) = extract(src);
        assert_eq!(s.figures[0].caption.as_deref(), Some("Cost ${O(n^2)}$ shown"));
    }

    #[test]
    fn labels_come_from_flat_source() {
        use crate::latex::normalize::{normalize, NormalizationPolicy};
        let src = "\\begin{figure}\\includegraphics{a}\\caption{A}\\label{fig:a}\\end{figure}\n\\begin{figure}\\includegraphics{b}\\caption{B}\\end{figure}";
        let flat = flat_of(src);
        let (normalized, _) = normalize(&flat.text, &NormalizationPolicy::default()).unwrap();
        let (s, _) = extract_structure(&flat, &normalized);
        assert_eq!(s.figures[0].label.as_deref(), Some("fig:a"));
        assert_eq!(s.figures[1].label, None);
    }

    #[test]
    fn commented_out_figures_do_not_shift_labels() {
        use crate::latex::normalize::{normalize, NormalizationPolicy};
        let src = "% \\begin{figure}\\includegraphics{old}\\end{figure}\n\\begin{figure}\\includegraphics{a}\\caption{A}\\label{fig:a}\\end{figure}";
        let flat = flat_of(src);
        let (normalized, _) = normalize(&flat.text, &NormalizationPolicy::default()).unwrap();
        let (s, _) = extract_structure(&flat, &normalized);
        assert_eq!(s.figures.len(), 1);
        assert_eq!(s.figures[0].label.as_deref(), Some("fig:a"));
    }

    #[test]
    fn sections_and_subsections_get_spans() {
        let src = "\\section{Intro} alpha \\subsection{Setup} beta \\section{Method} gamma";
        let (s, _) = extract(src);
        let titles: Vec<(&str, u8)> = s
            .sections
            .iter()
            .map(|sec| (sec.title.as_str(), sec.level))
            .collect();
        assert_eq!(
            titles,
            vec![("Intro", 1), ("Setup", 2), ("Method", 1)]
        );
        assert_eq!(&src[s.sections[0].start..s.sections[0].end], " alpha ");
        assert_eq!(&src[s.sections[1].start..s.sections[1].end], " beta ");
        assert_eq!(&src[s.sections[2].start..s.sections[2].end], " gamma");
        // Anchors and spans stay inside the document.
        for sec in &s.sections {
            assert!(sec.start <= sec.end && sec.end <= src.len());
        }
    }

    #[test]
    fn figure_anchors_are_monotone() {
        let src = "\\begin{figure}\\includegraphics{a}\\end{figure} mid \\begin{figure}\\includegraphics{b}\\end{figure}";
        let (s, _) = extract(src);
        assert!(s.figures.windows(2).all(|w| w[0].anchor < w[1].anchor));
    }
}
