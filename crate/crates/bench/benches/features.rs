use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rnaseg_core::pipeline::{prepare_patch, PipelineConfig};
use rnaseg_core::synth::{generate, SynthConfig};
use rnaseg_core::texture::{extract, extract_all, gldm, glcm, glrlm, glszm, ngtdm, FeatureSet, Window};

fn matrices(c: &mut Criterion) {
    let values: Vec<u8> = (0..121u32).map(|k| (k * 37 % 251) as u8).collect();
    let q = Window::new(11, values).quantize();
    let mut g = c.benchmark_group("matrices_w11");
    g.bench_function("glcm_d3", |b| b.iter(|| glcm(black_box(&q), 3)));
    g.bench_function("glrlm", |b| b.iter(|| glrlm(black_box(&q))));
    g.bench_function("glszm", |b| b.iter(|| glszm(black_box(&q))));
    g.bench_function("gldm_d3_a2", |b| b.iter(|| gldm(black_box(&q), 3, 2)));
    g.bench_function("ngtdm_d3", |b| b.iter(|| ngtdm(black_box(&q), 3)));
    g.finish();
}

fn per_candidate(c: &mut Criterion) {
    let (img, _) = generate(&SynthConfig::default()).unwrap();
    let prep = prepare_patch(&img, &PipelineConfig::default()).unwrap();
    let channels = prep.feature_channels();
    let cands = prep.candidates();
    let mut g = c.benchmark_group("extract");
    for set in [FeatureSet::Reduced, FeatureSet::Full] {
        g.bench_with_input(BenchmarkId::new("one_candidate", set), &set, |b, &set| {
            let mut k = 0;
            b.iter(|| {
                k = (k + 1) % cands.len();
                extract(set, &channels, black_box(&cands[k]))
            })
        });
    }
    let batch = &cands[..cands.len().min(500)];
    g.throughput(Throughput::Elements(batch.len() as u64));
    g.sample_size(10);
    for set in [FeatureSet::Reduced, FeatureSet::Full] {
        g.bench_with_input(BenchmarkId::new("batch", set), &set, |b, &set| {
            b.iter(|| extract_all(set, &channels, black_box(batch)))
        });
    }
    g.finish();
}

criterion_group!(benches, matrices, per_candidate);
criterion_main!(benches);
