use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lamegap::free_constants;
use lamegap::oracle::{build_reference_domain, solve_full, FemSystem};
use lamegap_bench::{e1_datum, oracle_config};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("fem_assembly_and_factor");
    for res in [64, 128] {
        let cfg = oracle_config(8, res);
        let (_, mesh) = build_reference_domain(5e-3, cfg.r1, cfg.r0, &cfg.mesh).unwrap();
        let mesh = Arc::new(mesh);
        g.bench_with_input(BenchmarkId::from_parameter(res), &mesh, |b, m| {
            b.iter(|| FemSystem::new(Arc::clone(black_box(m)), cfg.lame).unwrap())
        });
    }
    g.finish();
}

fn full_solve(c: &mut Criterion) {
    let phi = e1_datum(2);
    let cfg = oracle_config(8, 128);
    let mut g = c.benchmark_group("oracle_full_solve");
    g.sample_size(20);
    for eps in [2e-2, 2.5e-3] {
        g.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &e| b.iter(|| solve_full(&phi, e, &cfg).unwrap()));
    }
    g.finish();
    let s = solve_full(&phi, 2.5e-3, &cfg).unwrap();
    c.bench_function("free_constants_3x3", |b| b.iter(|| free_constants(black_box(&s.factors)).unwrap()));
}

criterion_group!(benches, assembly, full_solve);
criterion_main!(benches);
