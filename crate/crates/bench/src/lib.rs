//! Synthetic corpus generators shared by the benchmark targets.

use rand::distr::{Alphanumeric, SampleString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use texrank_core::embed::Embedding;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` pseudo-words of 3-9 letters, drawn from a small vocabulary so
/// term statistics resemble prose rather than unique tokens.
pub fn synthetic_text(rng: &mut ChaCha8Rng, count: usize) -> String {
    let vocab: Vec<String> = (0..800)
        .map(|_| {
            let len = rng.random_range(3..=9);
            Alphanumeric.sample_string(rng, len).to_lowercase()
        })
        .collect();
    (0..count)
        .map(|_| vocab[rng.random_range(0..vocab.len())].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A LaTeX article with `sections` sections, each holding a paragraph and
/// every third one a figure environment.
pub fn synthetic_latex(rng: &mut ChaCha8Rng, sections: usize) -> String {
    let mut out = String::from("\\documentclass{article}\n\\begin{document}\n");
    for i in 0..sections {
        out.push_str(&format!("\\section{{Section {i}}}\n"));
        out.push_str(&format!(
            "Some \\emph{{notable}} text with a citation\\cite{{ref{i}}} and math $x_{i} = {i}$. % comment {i}\n"
        ));
        out.push_str(&synthetic_text(rng, 120));
        out.push('\n');
        if i % 3 == 0 {
            out.push_str(&format!(
                "\\begin{{figure}}\\includegraphics{{plot{i}.png}}\\caption{{Trend {i} over time.}}\\end{{figure}}\n"
            ));
        }
    }
    out.push_str("\\end{document}\n");
    out
}

pub fn random_embedding(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Embedding {
    let data: Vec<Vec<f32>> = (0..rows)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect();
    Embedding::from_rows(data, dim).expect("consistent row widths")
}
