use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaitlevels_bench::{cluster_data, table_dataset};
use gaitlevels_core::embedding::{build_graph, fit_ab, knn_graph, layout_objective, smooth_knn_calibrate, Metric};
use gaitlevels_core::level1::{compute_scores, summarize_scores};
use gaitlevels_core::{embed, preprocess_pipeline, EmbedParams, OptimizerMode, PreprocessConfig, ScoreMode};

fn preprocessing(c: &mut Criterion) {
    let ds = table_dataset(200);
    c.bench_function("preprocess_and_score_2400", |b| {
        b.iter(|| {
            let pre = preprocess_pipeline(black_box(&ds), &PreprocessConfig::default()).unwrap();
            summarize_scores(&compute_scores(&pre, ScoreMode::Normalized), &[])
        })
    });
}

fn graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("knn_graph");
    for n_per in [100, 300] {
        let x = cluster_data(n_per);
        group.bench_with_input(BenchmarkId::from_parameter(3 * n_per), &x, |b, x| {
            b.iter(|| knn_graph(x.view(), 15, Metric::Euclidean).unwrap())
        });
    }
    group.finish();

    let x = cluster_data(100);
    let g = knn_graph(x.view(), 15, Metric::Euclidean).unwrap();
    c.bench_function("smooth_knn_calibrate_300", |b| {
        b.iter(|| {
            g.distances
                .iter()
                .map(|d| smooth_knn_calibrate(d, 15, 1e-5).sigma)
                .sum::<f64>()
        })
    });
    c.bench_function("fit_ab", |b| b.iter(|| fit_ab(black_box(0.1), 1.0).unwrap()));
}

fn objective(c: &mut Criterion) {
    let x = cluster_data(100);
    let params = EmbedParams::default();
    let fg = build_graph(x.view(), &params).unwrap();
    let z = embed(x.view(), &params, 1).unwrap().coords;
    c.bench_function("layout_objective_300", |b| {
        b.iter(|| layout_objective(z.view(), &fg, 1.577, 0.895))
    });
}

fn embedding(c: &mut Criterion) {
    let x = cluster_data(100);
    let mut group = c.benchmark_group("embed_300");
    group.sample_size(10);
    for mode in [OptimizerMode::Sequential, OptimizerMode::Parallel] {
        let params = EmbedParams {
            optimizer: mode,
            ..EmbedParams::default()
        };
        group.bench_function(format!("{mode:?}"), |b| b.iter(|| embed(x.view(), &params, 1).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, preprocessing, graph, objective, embedding);
criterion_main!(benches);
