use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use treelet::baselines::dissimilarity_from_similarity;
use treelet::eval::{nearest_centroid_cv, CvConfig};
use treelet::simgen::{gen_block, BlockModelSpec};
use treelet::{
    hc_fit, pca_fit, sample_correlation, sample_covariance, treelet_fit, Linkage, TreeletConfig,
};

fn data(blocks: usize, size: usize) -> treelet::DataMatrix {
    gen_block(&BlockModelSpec::uniform(0, 200, blocks, size, 0.8, 0.2))
        .unwrap()
        .data
}

fn methods(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    for p in [20usize, 50, 100] {
        let x = data(p / 10, 10);
        group.bench_with_input(BenchmarkId::new("treelet", p), &x, |b, x| {
            b.iter(|| treelet_fit(black_box(x), x.p() - 1, TreeletConfig::default()).unwrap())
        });
        let cov = sample_covariance(&x).unwrap();
        group.bench_with_input(BenchmarkId::new("pca", p), &cov, |b, cov| {
            b.iter(|| pca_fit(black_box(cov)).unwrap())
        });
        let d = dissimilarity_from_similarity(&sample_correlation(&x).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("hc_average", p), &d, |b, d| {
            b.iter(|| hc_fit(black_box(d), Linkage::Average).unwrap())
        });
    }
    group.finish();
}

fn transform(c: &mut Criterion) {
    let x = data(5, 10);
    let fit = treelet_fit(&x, x.p() - 1, TreeletConfig::default()).unwrap();
    c.bench_function("transform/p50_n200", |b| {
        b.iter(|| fit.basis.transform(black_box(&x), 49).unwrap())
    });
}

fn cross_validation(c: &mut Criterion) {
    let x = data(20, 10);
    let y: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
    let mut group = c.benchmark_group("cv");
    group.sample_size(10);
    group.bench_function("clean_p200_n200", |b| {
        b.iter(|| nearest_centroid_cv(black_box(&x), &y, &CvConfig::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, methods, transform, cross_validation);
criterion_main!(benches);
