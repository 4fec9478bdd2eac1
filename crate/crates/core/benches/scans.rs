use std::hint::black_box;

use bergman::criteria::{hinf_norm_scan, tail_criterion_scan, ScanOptions};
use bergman::par::Execution;
use bergman::projection::szego_check_with;
use bergman::projection::{szego_points, SzegoMethod};
use bergman::weights::WeightSpec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn tail_scan(c: &mut Criterion) {
    let (omega, nu) = (WeightSpec::log_perturbed(-1.0, -2.0), WeightSpec::standard(0.0));
    let mut g = c.benchmark_group("tail_scan");
    for (name, exec) in MODES {
        let opts = ScanOptions { exec, ..ScanOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| tail_criterion_scan(black_box(&omega), &nu, &opts).unwrap())
        });
    }
    g.finish();
}

fn hinf_scan(c: &mut Criterion) {
    let omega = WeightSpec::standard(1.0);
    let v = WeightSpec::tail_of(WeightSpec::standard(0.0), 1.0);
    let mut g = c.benchmark_group("hinf_scan");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = ScanOptions { exec, norm_depth: 8, ..ScanOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| hinf_norm_scan(black_box(&omega), &v, &opts).unwrap())
        });
    }
    g.finish();
}

fn szego(c: &mut Criterion) {
    let omega = WeightSpec::exponential(1.0, 1.0, 1.0);
    let points = szego_points();
    let mut g = c.benchmark_group("szego_modes");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| szego_check_with(black_box(&omega), 8, 1e-12, SzegoMethod::Modes, &points, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, tail_scan, hinf_scan, szego);
criterion_main!(benches);
