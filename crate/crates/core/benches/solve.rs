use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinboson::*;

fn workload() -> (ModelSpec, Vec<SectorLabels>) {
    let params: BTreeMap<String, f64> = [("w1", 1.1), ("w2", 0.7), ("g_prime", -0.4), ("g", 0.3)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let model = preset(PresetName::TwoModeTc, &params).unwrap();
    let sectors = enumerate_sectors(&model, Rational::integer(4), 3).unwrap();
    (model, sectors)
}

fn bench_solve(c: &mut Criterion) {
    let (model, sectors) = workload();
    let mut group = c.benchmark_group("solve_sectors");
    for (label, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| solve_sectors(black_box(&model), &sectors, SolveOptions::default(), exec))
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verification_grid");
    group.sample_size(10);
    for (label, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        let opts = verify::VerifyOptions {
            draws: 2,
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(label), &opts, |b, opts| {
            b.iter(|| verify::run_verification(black_box(opts)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solve, bench_verify);
criterion_main!(benches);
