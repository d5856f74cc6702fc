use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mildbank::bupu::tent_bupu;
use mildbank::feichtinger::stft;
use mildbank::fourier::fourier;
use mildbank::grid::gaussian;
use mildbank::systems::{kernel_build, kernel_compose, KernelKind};
use mildbank::wiener::{wiener_norm, Variant};
use mildbank_bench::{default_grid, mixture, self_dual};

fn bench_ft(c: &mut Criterion) {
    let mut group = c.benchmark_group("ft");
    for n in [256usize, 1024, 4096] {
        let g = mildbank::Grid::line(64.0 / n as f64, n).unwrap();
        let f = mixture(&g);
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| fourier(black_box(&f)).unwrap()));
    }
    group.finish();
}

fn bench_stft(c: &mut Criterion) {
    let mut group = c.benchmark_group("stft");
    let g = default_grid();
    let (f, w) = (mixture(&g), gaussian(&g));
    for stride in [4usize, 16] {
        group.bench_function(BenchmarkId::new("stride", stride), |b| {
            b.iter(|| stft(black_box(&f), &w, stride).unwrap())
        });
    }
    group.finish();
}

fn bench_wiener_norm(c: &mut Criterion) {
    let g = default_grid();
    let psi = tent_bupu(&g);
    let f = mixture(&g);
    c.bench_function("wiener_norm", |b| b.iter(|| wiener_norm(black_box(&f), &psi, Variant::Bupu).unwrap()));
}

fn bench_kernel_compose(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_compose");
    group.sample_size(10);
    for n in [64usize, 256] {
        let g = self_dual(n);
        let (ift, ft) = (kernel_build(KernelKind::Ift, &g).unwrap(), kernel_build(KernelKind::Ft, &g).unwrap());
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| kernel_compose(black_box(&ift), black_box(&ft)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ft, bench_stft, bench_wiener_norm, bench_kernel_compose);
criterion_main!(benches);
