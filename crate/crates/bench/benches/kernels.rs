use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levy_entropy::density::density_grid;
use levy_entropy::entropy::{marginal_entropy, quantized_law};
use levy_entropy::montecarlo::sample_increments;
use levy_entropy::{ExponentEvaluator, ProcessSpec};
use std::hint::black_box;

fn specs() -> Vec<ProcessSpec> {
    vec![
        ProcessSpec::sas(1.5, 1.0).unwrap(),
        ProcessSpec::laplace(1.0).unwrap(),
        ProcessSpec::layered_stable(0.8, 1.6, 1.0, 1.0).unwrap(),
        ProcessSpec::tempered_stable(1.2, 1.0, 1.0, 1.0).unwrap(),
    ]
}

fn psi(c: &mut Criterion) {
    let mut g = c.benchmark_group("psi");
    for spec in specs() {
        let ev = ExponentEvaluator::new(&spec).unwrap();
        g.bench_function(BenchmarkId::from_parameter(spec.family().name()), |b| {
            b.iter(|| ev.eval(black_box(137.5)).unwrap())
        });
    }
    g.finish();
}

fn density(c: &mut Criterion) {
    let mut g = c.benchmark_group("density_fft");
    g.sample_size(10);
    for spec in specs() {
        g.bench_function(BenchmarkId::from_parameter(spec.family().name()), |b| {
            b.iter(|| density_grid(&spec, black_box(1.0), 1 << 14, None).unwrap())
        });
    }
    g.finish();
}

fn entropy(c: &mut Criterion) {
    let mut g = c.benchmark_group("entropy");
    g.sample_size(10);
    for spec in specs() {
        g.bench_function(BenchmarkId::new("marginal", spec.family().name()), |b| {
            b.iter(|| marginal_entropy(&spec, black_box(1.0)).unwrap())
        });
    }
    let wiener = ProcessSpec::wiener(1.0, 0.0).unwrap();
    g.bench_function("quantized/Wiener/m=256", |b| b.iter(|| quantized_law(&wiener, black_box(1.0), 256).unwrap()));
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_100k");
    g.sample_size(10);
    for spec in
        [ProcessSpec::sas(1.5, 1.0).unwrap(), ProcessSpec::gamma(1.0, 1.0).unwrap(), ProcessSpec::laplace(1.0).unwrap()]
    {
        g.bench_function(BenchmarkId::from_parameter(spec.family().name()), |b| {
            b.iter(|| sample_increments(&spec, 0.1, 100_000, black_box(7)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, psi, density, entropy, sampling);
criterion_main!(benches);
