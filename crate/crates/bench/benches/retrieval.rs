use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use texrank_bench::{random_embedding, rng, synthetic_text};
use texrank_core::embed::{Precision, ProviderDescriptor, UnitEmbedding};
use texrank_core::eval::ndcg_at_k;
use texrank_core::index::{IndexManifest, VectorIndex};
use texrank_core::repr::{chunk_text, ChunkingConfig};
use texrank_core::retrieval::{doc_scores, score_maxsim, Bm25Index, Bm25Params};
use texrank_core::RepresentationKind;

const DIM: usize = 128;

fn descriptor() -> ProviderDescriptor {
    ProviderDescriptor {
        name: "bench".into(),
        modality: texrank_core::embed::Modality::Text,
        vector_mode: texrank_core::embed::VectorMode::Multi,
        dimension: DIM,
        normalizes: false,
        max_pixels: None,
        patch_size: None,
    }
}

fn bench_maxsim(c: &mut Criterion) {
    let mut r = rng(1);
    let query = random_embedding(&mut r, 8, DIM);
    let unit = random_embedding(&mut r, 16, DIM);
    c.bench_function("maxsim_8x16x128", |b| {
        b.iter(|| score_maxsim(black_box(&query), black_box(&unit)).unwrap())
    });
}

fn bench_doc_scores(c: &mut Criterion) {
    let mut r = rng(2);
    let doc_ids: Vec<String> = (0..100).map(|i| format!("doc-{i:03}")).collect();
    let units: Vec<UnitEmbedding> = (0..1000)
        .map(|i| UnitEmbedding {
            doc_id: doc_ids[i % 100].clone(),
            unit_id: format!("unit-{i:05}"),
            vectors: random_embedding(&mut r, 4, DIM),
            precision: Precision::F32,
        })
        .collect();
    let manifest = IndexManifest::new(
        RepresentationKind::TextOnly,
        descriptor(),
        512,
        0,
        None,
        Precision::F32,
        doc_ids,
    );
    let index = VectorIndex::build(manifest, &units).unwrap();
    let query = random_embedding(&mut r, 8, DIM);
    c.bench_function("doc_scores_1000_units_k10", |b| {
        b.iter(|| doc_scores(black_box(&query), black_box(&index), 10).unwrap())
    });
}

fn bench_bm25(c: &mut Criterion) {
    let mut r = rng(3);
    let mut chunks = Vec::new();
    for i in 0..200 {
        let text = synthetic_text(&mut r, 300);
        chunks.extend(chunk_text(&format!("doc-{i:03}"), &text, &ChunkingConfig::default()).unwrap());
    }
    c.bench_function("bm25_build_200_docs", |b| {
        b.iter(|| Bm25Index::build(black_box(&chunks), Bm25Params::default()).unwrap())
    });
    let index = Bm25Index::build(&chunks, Bm25Params::default()).unwrap();
    let query = synthetic_text(&mut r, 8);
    c.bench_function("bm25_search_200_docs", |b| {
        b.iter(|| index.search(black_box(&query), 10))
    });
}

fn bench_ndcg(c: &mut Criterion) {
    let ranked: Vec<String> = (0..1000).map(|i| format!("doc-{i:04}")).collect();
    c.bench_function("ndcg_at_10_of_1000", |b| {
        b.iter(|| ndcg_at_k(black_box(&ranked), black_box("doc-0500"), 10))
    });
}

criterion_group!(benches, bench_maxsim, bench_doc_scores, bench_bm25, bench_ndcg);
criterion_main!(benches);
