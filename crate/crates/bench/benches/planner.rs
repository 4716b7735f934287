use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use keyrot_core::exactmath::log2_rational;
use keyrot_core::planner::{compute_q_star, improvement_bits, sweep_k};
use keyrot_core::reference::Sm4Example;
use keyrot_core::{Mode, Natural, Rational};

fn bench_q_star(c: &mut Criterion) {
    let ex = Sm4Example::default();
    let params = ex.params();
    let size = ex.file_size_bytes();
    let mut group = c.benchmark_group("compute_q_star");
    for mode in Mode::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(mode.as_str()), &mode, |b, &mode| {
            b.iter(|| compute_q_star(black_box(mode), &params, &size).unwrap())
        });
    }
    group.finish();
}

fn bench_improvement(c: &mut Criterion) {
    let ex = Sm4Example::default();
    let params = ex.params();
    let plan = compute_q_star(Mode::Ctr, &params, &ex.file_size_bytes()).unwrap();
    c.bench_function("improvement_bits ctr k=2", |b| {
        b.iter(|| improvement_bits(Mode::Ctr, &params, &plan.q_star, black_box(&Natural::from(2u64))).unwrap())
    });
    let ks: Vec<Natural> = (0..=10).map(Natural::pow2).collect();
    c.bench_function("sweep_k ctr 2^0..2^10", |b| {
        b.iter(|| sweep_k(Mode::Ctr, &params, &plan.q_star, black_box(&ks), &Rational::one()).unwrap())
    });
}

fn bench_log2(c: &mut Criterion) {
    let x = Rational::new(Natural::from(1_210_759u64), Natural::pow2(80)).unwrap();
    let mut group = c.benchmark_group("log2_rational");
    for p in [9u32, 15, 30] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| b.iter(|| log2_rational(black_box(&x), p)));
    }
    group.finish();
}

criterion_group!(planner, bench_q_star, bench_improvement, bench_log2);
criterion_main!(planner);
