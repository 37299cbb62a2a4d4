use std::collections::{BTreeMap, BTreeSet};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use featnorm_core::analysis::{cosine_similarity_matrix, hierarchical_cluster, within_minus_between};
use featnorm_core::elicitation::{RawResponse, SamplingParams};
use featnorm_core::evaluation::commonality_analysis;
use featnorm_core::lexicon::{ClosedClassLexicon, SynsetLexicon};
use featnorm_core::normalize::{normalize_corpus, NormalizeOptions};
use featnorm_core::norms::{build_matrix, unique_feature_curve};
use featnorm_core::{CategoryScheme, FeatureNorm, NormEntry, Provenance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PHRASES: &[&str] = &[
    "It is an animal",
    "it has four legs",
    "it is a big red car",
    "it is very fast",
    "it has wings and feathers",
    "it is used for cutting things that are soft",
    "it is sweet and juicy",
    "it is an automobile",
    "it is large",
    "it can fly",
    "it lives in water",
    "it is a heavy tool",
];

fn corpus(concepts: usize, runs: u32, rng: &mut ChaCha8Rng) -> Vec<RawResponse> {
    let mut out = Vec::new();
    for run in 0..runs {
        for c in 0..concepts {
            let n = rng.random_range(3..9);
            let completion = (0..n)
                .map(|_| PHRASES[rng.random_range(0..PHRASES.len())])
                .collect::<Vec<_>>()
                .join(", ");
            out.push(RawResponse {
                concept_id: format!("c{c:04}"),
                run_id: run,
                prompt_hash: String::new(),
                completion,
                model: "bench".into(),
                params: SamplingParams {
                    temperature: 0.7,
                    max_tokens: 64,
                },
            });
        }
    }
    out
}

fn random_norm(concepts: usize, features: usize, per_concept: usize, rng: &mut ChaCha8Rng) -> FeatureNorm {
    let mut entries = Vec::new();
    for c in 0..concepts {
        let picked: BTreeSet<usize> = (0..per_concept).map(|_| rng.random_range(0..features)).collect();
        for f in picked {
            entries.push(NormEntry::new(
                format!("c{c:04}"),
                format!("it has trait {f}"),
                rng.random_range(1..=30),
            ));
        }
    }
    FeatureNorm::new(entries, 30, Provenance::Generated)
}

fn normalization(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let responses = corpus(200, 30, &mut rng);
    c.bench_function("normalize_corpus 200x30", |b| {
        b.iter(|| {
            normalize_corpus(
                black_box(&responses),
                ClosedClassLexicon::bundled(),
                SynsetLexicon::bundled(),
                &NormalizeOptions::default(),
            )
            .unwrap()
        })
    });
}

fn similarity_and_clustering(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("similarity");
    for n in [100, 400] {
        let norm = random_norm(n, 2000, 60, &mut rng);
        let ids: Vec<String> = norm.concepts().iter().cloned().collect();
        let m = build_matrix(&norm, &ids).unwrap();
        group.bench_with_input(BenchmarkId::new("cosine_matrix", n), &m, |b, m| {
            b.iter(|| cosine_similarity_matrix(black_box(m)).unwrap())
        });
        let s = cosine_similarity_matrix(&m).unwrap();
        group.bench_with_input(BenchmarkId::new("average_linkage", n), &s, |b, s| {
            b.iter(|| hierarchical_cluster(black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("unique_feature_curve", n), &norm, |b, norm| {
            b.iter(|| unique_feature_curve(black_box(norm), 10).unwrap())
        });
    }
    group.finish();
}

fn category_bootstrap(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let norm = random_norm(300, 1500, 40, &mut rng);
    let ids: Vec<String> = norm.concepts().iter().cloned().collect();
    let s = cosine_similarity_matrix(&build_matrix(&norm, &ids).unwrap()).unwrap();
    let mut cats: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        cats.entry(format!("cat{}", i % 6)).or_default().insert(id.clone());
    }
    let cats = CategoryScheme::new(cats).unwrap();
    c.bench_function("within_minus_between 300 concepts, B=1000", |b| {
        b.iter(|| within_minus_between(black_box(&s), &cats, 1000, 0).unwrap())
    });
}

fn commonality(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // lower triangle of a 317-concept matrix
    let n = 317 * 316 / 2;
    let xs: Vec<(String, Vec<f64>)> = (0..3)
        .map(|i| (format!("x{i}"), (0..n).map(|_| rng.random_range(0.0..1.0)).collect()))
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| xs.iter().map(|x| x.1[i]).sum::<f64>() + rng.random_range(0.0..1.0))
        .collect();
    c.bench_function("commonality 3 predictors, 317 concepts", |b| {
        b.iter(|| commonality_analysis(black_box(&y), &xs).unwrap())
    });
}

criterion_group!(
    benches,
    normalization,
    similarity_and_clustering,
    category_bootstrap,
    commonality
);
criterion_main!(benches);
