use std::hint::black_box;

use campusnet::community::{detect, Method};
use campusnet::compare::{contingency, rand_zscore};
use campusnet::dyad::{build_design, fit_logistic};
use campusnet::graph::{largest_connected_component, Attribute};
use campusnet::synthetic::{rng, toy_institution};
use campusnet::{assortativity, mixing_matrix, MissingPolicy, Partition, Provenance};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn campus(n: usize) -> campusnet::NetworkView {
    largest_connected_component(&toy_institution(n, 17)).expect("non-empty")
}

fn bench_assortativity(c: &mut Criterion) {
    let view = campus(2000);
    c.bench_function("assortativity/6 attributes n=2000", |b| {
        b.iter(|| {
            for a in Attribute::ALL {
                let mm = mixing_matrix(black_box(&view), a, MissingPolicy::Include).unwrap();
                black_box(assortativity(&mm).ok());
            }
        })
    });
}

fn bench_detection(c: &mut Criterion) {
    let mut group = c.benchmark_group("detect");
    group.sample_size(10);
    let view = campus(800);
    for method in Method::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(method.name()), &method, |b, &m| {
            b.iter(|| detect(black_box(&view), m, 42))
        });
    }
    group.finish();
}

fn bench_zscore(c: &mut Criterion) {
    use rand::Rng;
    let mut r = rng(3);
    let n = 5000;
    let a: Vec<usize> = (0..n).map(|_| r.random_range(0..40)).collect();
    let b: Vec<usize> = (0..n).map(|_| r.random_range(0..12)).collect();
    let (pa, pb) = (
        Partition::from_assignment(&a, Provenance::External),
        Partition::from_assignment(&b, Provenance::External),
    );
    c.bench_function("rand z-score n=5000", |bench| {
        bench.iter(|| rand_zscore(&contingency(black_box(&pa), black_box(&pb)).unwrap()).unwrap())
    });
}

fn bench_dyad(c: &mut Criterion) {
    let mut group = c.benchmark_group("dyad");
    group.sample_size(10);
    let view = campus(800);
    group.bench_function("design n=800", |b| b.iter(|| build_design(black_box(&view), true).unwrap()));
    let design = build_design(&view, false).unwrap();
    group.bench_function("logit fit n=800", |b| b.iter(|| fit_logistic(black_box(&design)).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_assortativity, bench_detection, bench_zscore, bench_dyad);
criterion_main!(benches);
