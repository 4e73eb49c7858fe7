//! Markup normalization: strip comments, delete reference-style commands
//! (`\cite`, `\ref`, ...), and unwrap styling commands (`\emph`, `\textbf`,
//! ...) while leaving math, verbatim blocks, and all other text untouched.
//!
//! The scanner is a single left-to-right pass over bytes. It is best-effort:
//! malformed regions (unclosed math, missing braces) are passed through
//! unmodified and counted rather than failing the document. Splices only ever
//! happen at ASCII boundaries, so UTF-8 text survives intact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environments whose bodies are copied verbatim, commands and all.
const PRESERVE_ENVS: &[&str] = &[
    "verbatim",
    "verbatim*",
    "lstlisting",
    "equation",
    "equation*",
    "align",
    "align*",
    "gather",
    "gather*",
    "multline",
    "multline*",
    "eqnarray",
    "eqnarray*",
    "displaymath",
    "math",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("command `{0}` appears in both the remove and unwrap lists")]
    OverlappingLists(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub strip_comments: bool,
    /// Commands deleted together with their optional `[...]` and `{...}` args.
    pub remove_commands: Vec<String>,
    /// Commands replaced by their argument content.
    pub unwrap_commands: Vec<String>,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        Self {
            strip_comments: true,
            remove_commands: ["cite", "ref", "label", "footnote"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            unwrap_commands: ["emph", "textbf", "textit", "texttt"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl NormalizationPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        for cmd in &self.remove_commands {
            if self.unwrap_commands.contains(cmd) {
                return Err(PolicyError::OverlappingLists(cmd.clone()));
            }
        }
        Ok(())
    }
}

/// Tallies of what normalization did (and what it could not parse).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeStats {
    pub comments_stripped: usize,
    pub commands_removed: usize,
    pub commands_unwrapped: usize,
    pub malformed_regions: usize,
}

pub fn normalize(
    text: &str,
    policy: &NormalizationPolicy,
) -> Result<(String, NormalizeStats), PolicyError> {
    policy.validate()?;
    let mut scanner = Scanner {
        text,
        bytes: text.as_bytes(),
        policy,
        out: Vec::with_capacity(text.len()),
        stats: NormalizeStats::default(),
        depth: 0,
        swallow: Vec::new(),
        i: 0,
    };
    scanner.run();
    let stats = scanner.finish_stats();
    let out = String::from_utf8(scanner.out).expect("splices happen at ASCII boundaries only");
    Ok((out, stats))
}

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
    policy: &'a NormalizationPolicy,
    out: Vec<u8>,
    stats: NormalizeStats,
    /// Current `{`-nesting depth. May go negative on stray `}`.
    depth: isize,
    /// Depths at which a close brace belongs to an unwrapped command and must
    /// be swallowed.
    swallow: Vec<isize>,
    i: usize,
}

impl Scanner<'_> {
    fn run(&mut self) {
        while self.i < self.bytes.len() {
            match self.bytes[self.i] {
                b'%' if self.policy.strip_comments => {
                    self.stats.comments_stripped += 1;
                    self.i = self.end_of_line(self.i);
                }
                b'$' => self.copy_dollar_math(),
                b'\\' => self.handle_backslash(),
                b'{' => {
                    self.depth += 1;
                    self.out.push(b'{');
                    self.i += 1;
                }
                b'}' => {
                    if self.swallow.last() == Some(&self.depth) {
                        self.swallow.pop();
                    } else {
                        self.out.push(b'}');
                    }
                    self.depth -= 1;
                    self.i += 1;
                }
                b => {
                    self.out.push(b);
                    self.i += 1;
                }
            }
        }
    }

    fn finish_stats(&mut self) -> NormalizeStats {
        // Unwrap groups left open at EOF never found their close brace.
        self.stats.malformed_regions += self.swallow.len();
        self.stats
    }

    /// Byte offset of the next `\n` at or after `from` (exclusive bound of
    /// the current line's content), or EOF.
    fn end_of_line(&self, from: usize) -> usize {
        self.bytes[from..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| from + p)
            .unwrap_or(self.bytes.len())
    }

    fn copy_verbatim_to(&mut self, end: usize) {
        self.out.extend_from_slice(&self.bytes[self.i..end]);
        self.i = end;
    }

    fn copy_rest_malformed(&mut self) {
        self.stats.malformed_regions += 1;
        self.copy_verbatim_to(self.bytes.len());
    }

    fn copy_dollar_math(&mut self) {
        let display = self.bytes.get(self.i + 1) == Some(&b'$');
        if display {
            match find_subslice(self.bytes, self.i + 2, b"$$") {
                Some(end) => self.copy_verbatim_to(end + 2),
                None => self.copy_rest_malformed(),
            }
        } else {
            let mut j = self.i + 1;
            while j < self.bytes.len() {
                match self.bytes[j] {
                    b'\\' => j += 2,
                    b'$' => {
                        self.copy_verbatim_to(j + 1);
                        return;
                    }
                    _ => j += 1,
                }
            }
            self.copy_rest_malformed();
        }
    }

    fn handle_backslash(&mut self) {
        let Some(&next) = self.bytes.get(self.i + 1) else {
            self.out.push(b'\\');
            self.i += 1;
            return;
        };
        if next.is_ascii_alphabetic() {
            let mut name_end = self.i + 1;
            while name_end < self.bytes.len() && self.bytes[name_end].is_ascii_alphabetic() {
                name_end += 1;
            }
            let name = &self.text[self.i + 1..name_end];
            if name == "begin" {
                if let Some(env_close) = self.preserved_env_close(name_end) {
                    match env_close {
                        Some(end) => self.copy_verbatim_to(end),
                        None => self.copy_rest_malformed(),
                    }
                    return;
                }
            }
            if self.policy.remove_commands.iter().any(|c| c == name) {
                self.remove_command(name_end);
            } else if self.policy.unwrap_commands.iter().any(|c| c == name) {
                self.unwrap_command(name_end);
            } else {
                self.copy_verbatim_to(name_end);
            }
        } else {
            match next {
                // \[ ... \] and \( ... \) display/inline math.
                b'[' => match find_subslice(self.bytes, self.i + 2, b"\\]") {
                    Some(end) => self.copy_verbatim_to(end + 2),
                    None => self.copy_rest_malformed(),
                },
                b'(' => match find_subslice(self.bytes, self.i + 2, b"\\)") {
                    Some(end) => self.copy_verbatim_to(end + 2),
                    None => self.copy_rest_malformed(),
                },
                _ => {
                    // Control symbol (\%, \\, \&, ...): copy backslash plus
                    // one full character.
                    let ch_len = self.text[self.i + 1..]
                        .chars()
                        .next()
                        .map(char::len_utf8)
                        .unwrap_or(1);
                    self.copy_verbatim_to(self.i + 1 + ch_len);
                }
            }
        }
    }

    /// If `\begin` at the current position opens a preserved environment,
    /// return `Some(end)` where `end` is one past its `\end{...}` (or
    /// `Some(None)` when the close is missing). `None` means: not preserved,
    /// handle `\begin` like any other command.
    fn preserved_env_close(&self, name_end: usize) -> Option<Option<usize>> {
        if self.bytes.get(name_end) != Some(&b'{') {
            return None;
        }
        let close = self.bytes[name_end + 1..]
            .iter()
            .position(|&b| b == b'}')
            .map(|p| name_end + 1 + p)?;
        let env = &self.text[name_end + 1..close];
        if !PRESERVE_ENVS.contains(&env) {
            return None;
        }
        let needle = format!("\\end{{{env}}}");
        Some(find_subslice(self.bytes, close + 1, needle.as_bytes()).map(|p| p + needle.len()))
    }

    /// Delete the command, any `[...]` arguments, and its brace argument. On
    /// an unbalanced brace argument, deletion stops at the end of the line.
    fn remove_command(&mut self, name_end: usize) {
        let Some(open) = self.skip_to_brace_arg(name_end) else {
            self.stats.malformed_regions += 1;
            self.copy_verbatim_to(name_end);
            return;
        };
        match self.scan_balanced(open) {
            Some(end) => {
                self.stats.commands_removed += 1;
                self.i = end;
            }
            None => {
                self.stats.malformed_regions += 1;
                self.i = self.end_of_line(open);
            }
        }
    }

    /// Drop the command token and its opening brace, and mark the matching
    /// close brace for swallowing; the argument body keeps getting scanned.
    fn unwrap_command(&mut self, name_end: usize) {
        let Some(open) = self.skip_to_brace_arg(name_end) else {
            self.stats.malformed_regions += 1;
            self.copy_verbatim_to(name_end);
            return;
        };
        self.depth += 1;
        self.swallow.push(self.depth);
        self.stats.commands_unwrapped += 1;
        self.i = open + 1;
    }

    /// From the end of a command name, skip horizontal whitespace and any
    /// number of `[...]` argument groups; return the position of the opening
    /// `{` if one follows.
    fn skip_to_brace_arg(&self, mut pos: usize) -> Option<usize> {
        loop {
            while matches!(self.bytes.get(pos), Some(b' ' | b'\t')) {
                pos += 1;
            }
            match self.bytes.get(pos) {
                Some(b'{') => return Some(pos),
                Some(b'[') => {
                    pos = self.bytes[pos + 1..]
                        .iter()
                        .position(|&b| b == b']')
                        .map(|p| pos + 1 + p + 1)?;
                }
                _ => return None,
            }
        }
    }

    /// Scan a balanced `{...}` group starting at `open`; returns one past the
    /// matching close. Honors `\{` escapes and `%` comments.
    fn scan_balanced(&self, open: usize) -> Option<usize> {
        debug_assert_eq!(self.bytes[open], b'{');
        let mut depth = 0isize;
        let mut j = open;
        while j < self.bytes.len() {
            match self.bytes[j] {
                b'\\' => j += 2,
                b'%' if self.policy.strip_comments => j = self.end_of_line(j),
                b'{' => {
                    depth += 1;
                    j += 1;
                }
                b'}' => {
                    depth -= 1;
                    j += 1;
                    if depth == 0 {
                        return Some(j);
                    }
                }
                _ => j += 1,
            }
        }
        None
    }
}

fn find_subslice(haystack: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    if from > haystack.len() {
        return None;
    }
    haystack[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| from + p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(text: &str) -> String {
        normalize(text, &NormalizationPolicy::default()).unwrap().0
    }

    #[test]
    fn strips_comment_and_removes_cite() {
        assert_eq!(norm("see \\cite{x} here % note\nnext"), "see  here \nnext");
    }

    #[test]
    fn unwraps_styling() {
        assert_eq!(norm("\\emph{bold} word"), "bold word");
    }

    #[test]
    fn math_is_preserved() {
        assert_eq!(norm("$E=mc^2$"), "$E=mc^2$");
        assert_eq!(norm("$a \\cite{x} b$"), "$a \\cite{x} b$");
        assert_eq!(norm("\\[ \\ref{eq} \\]"), "\\[ \\ref{eq} \\]");
        assert_eq!(norm("$$x % y$$"), "$$x % y$$");
    }

    #[test]
    fn math_environments_are_preserved() {
        let src = "\\begin{equation}\n\\label{eq:1} x\n\\end{equation} tail \\ref{eq:1}";
        assert_eq!(
            norm(src),
            "\\begin{equation}\n\\label{eq:1} x\n\\end{equation} tail "
        );
    }

    #[test]
    fn verbatim_is_passed_through() {
        let src = "\\begin{verbatim}\n% not a comment \\cite{x}\n\\end{verbatim}";
        assert_eq!(norm(src), src);
    }

    #[test]
    fn nested_unwraps_resolve_in_one_pass() {
        assert_eq!(norm("\\emph{\\textbf{x} y}"), "x y");
        assert_eq!(norm("\\emph{{x}}"), "{x}");
    }

    #[test]
    fn removal_handles_optional_args_and_nested_braces() {
        assert_eq!(norm("a \\cite[p.~3]{key} b"), "a  b");
        assert_eq!(norm("a \\footnote{see \\emph{x}} b"), "a  b");
        assert_eq!(norm("a \\footnote{brace {pair} inside} b"), "a  b");
    }

    #[test]
    fn escaped_percent_is_not_a_comment() {
        assert_eq!(norm("50\\% of runs % real comment\nx"), "50\\% of runs \nx");
    }

    #[test]
    fn unknown_commands_pass_through() {
        let src = "\\section{Intro} \\alpha \\includegraphics[width=2cm]{fig}";
        assert_eq!(norm(src), src);
    }

    #[test]
    fn unbalanced_removal_stops_at_end_of_line() {
        let (out, stats) = normalize(
            "a \\footnote{oops\nnext line",
            &NormalizationPolicy::default(),
        )
        .unwrap();
        assert_eq!(out, "a \nnext line");
        assert_eq!(stats.malformed_regions, 1);
    }

    #[test]
    fn missing_brace_arg_is_passed_through() {
        let (out, stats) =
            normalize("\\emph and \\cite.", &NormalizationPolicy::default()).unwrap();
        assert_eq!(out, "\\emph and \\cite.");
        assert_eq!(stats.malformed_regions, 2);
    }

    #[test]
    fn stats_count_each_action() {
        let (_, stats) = normalize(
            "\\cite{a} \\ref{b} % c\n\\emph{d} $e$",
            &NormalizationPolicy::default(),
        )
        .unwrap();
        assert_eq!(stats.commands_removed, 2);
        assert_eq!(stats.comments_stripped, 1);
        assert_eq!(stats.commands_unwrapped, 1);
        assert_eq!(stats.malformed_regions, 0);
    }

    #[test]
    fn overlapping_policy_lists_are_rejected() {
        let policy = NormalizationPolicy {
            remove_commands: vec!["emph".into()],
            ..NormalizationPolicy::default()
        };
        assert_eq!(
            normalize("x", &policy).unwrap_err(),
            PolicyError::OverlappingLists("emph".into())
        );
    }

    #[test]
    fn comment_inside_removed_arg_is_handled() {
        assert_eq!(norm("a\\footnote{x % }\n}b"), "ab");
    }

    #[test]
    fn utf8_text_survives() {
        let src = "naïve Δ-test \\emph{süß} % übrig\nrest";
        assert_eq!(norm(src), "naïve Δ-test süß \nrest");
    }

    #[test]
    fn idempotent_on_representative_inputs() {
        let cases = [
            "see \\cite{x} here % note\nnext",
            "\\emph{bold} word",
            "$E=mc^2$ and \\[x\\]",
            "a \\footnote{oops\nnext line",
            "\\emph and \\cite.",
            "\\begin{verbatim}\\cite{x}\\end{verbatim}",
            "\\emph{unclosed",
            "stray } brace { pair",
        ];
        for case in cases {
            let once = norm(case);
            assert_eq!(norm(&once), once, "not idempotent for {case:?}");
        }
    }
}
