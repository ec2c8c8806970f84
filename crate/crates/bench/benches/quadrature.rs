use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lamegap::quadrature::{moment_integral, q_leading};
use lamegap::{GapProfile, LameConstants};
use lamegap_bench::{e1_datum, reference_profile};

fn moments(c: &mut Criterion) {
    let mut g = c.benchmark_group("moment_integral_2d");
    for eps in [1e-4, 1e-6, 1e-8] {
        let p = reference_profile(eps);
        g.bench_with_input(BenchmarkId::from_parameter(eps), &p, |b, p| {
            b.iter(|| moment_integral(black_box(p), 0, 1.0).unwrap())
        });
    }
    g.finish();
    let p3 = GapProfile::quadratic(&[1.0, 2.0], 1e-4, 1.0).unwrap();
    c.bench_function("moment_integral_3d_nonradial", |b| b.iter(|| moment_integral(black_box(&p3), 0, 1.0).unwrap()));
}

fn functionals(c: &mut Criterion) {
    let p = reference_profile(1e-4);
    let phi = e1_datum(2);
    let lame = LameConstants::unit();
    c.bench_function("q_leading_e1_2d", |b| b.iter(|| q_leading(1, black_box(&phi), &p, &lame, 1.0).unwrap()));
}

criterion_group!(benches, moments, functionals);
criterion_main!(benches);
