use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use texrank_bench::{rng, synthetic_latex};
use texrank_core::ingest::{ingest_project, IngestOptions};
use texrank_core::latex::{flatten, normalize, LatexProject};
use texrank_core::repr::{chunk_text, ChunkingConfig};

fn bench_flatten(c: &mut Criterion) {
    let mut r = rng(10);
    let root: String = (0..6).map(|i| format!("\\input{{part{i}}}\n")).collect();
    let mut files = vec![(
        "main.tex".to_string(),
        format!("\\documentclass{{article}}\n\\begin{{document}}\n{root}\\end{{document}}\n"),
    )];
    for i in 0..6 {
        files.push((format!("part{i}.tex"), synthetic_latex(&mut r, 4)));
    }
    let file_refs: Vec<(String, String)> = files;
    let project = LatexProject::new(
        "bench-doc",
        "main.tex",
        file_refs.into_iter().collect(),
        Default::default(),
    )
    .unwrap();
    c.bench_function("flatten_6_includes", |b| {
        b.iter(|| flatten(black_box(&project), &Default::default()).unwrap())
    });
}

fn bench_normalize(c: &mut Criterion) {
    let mut r = rng(11);
    let source = synthetic_latex(&mut r, 40);
    c.bench_function("normalize_40_sections", |b| {
        b.iter(|| normalize(black_box(&source), &Default::default()).unwrap())
    });
}

fn bench_ingest(c: &mut Criterion) {
    let mut r = rng(12);
    let source = synthetic_latex(&mut r, 40);
    let project = LatexProject::single("bench-doc", source);
    c.bench_function("ingest_single_doc", |b| {
        b.iter(|| ingest_project(black_box(&project), &IngestOptions::default()).unwrap())
    });
}

fn bench_chunking(c: &mut Criterion) {
    let mut r = rng(13);
    let source = synthetic_latex(&mut r, 40);
    let doc = ingest_project(&LatexProject::single("bench-doc", source), &IngestOptions::default())
        .unwrap();
    c.bench_function("chunk_normalized_doc", |b| {
        b.iter(|| chunk_text("bench-doc", black_box(&doc.normalized), &ChunkingConfig::default()).unwrap())
    });
}

criterion_group!(benches, bench_flatten, bench_normalize, bench_ingest, bench_chunking);
criterion_main!(benches);
