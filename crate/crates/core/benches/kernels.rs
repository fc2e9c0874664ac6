//! Single worker against the default rayon pool for the data-parallel
//! kernels. Built without the `parallel` feature both variants run the
//! sequential fallback, which gives the baseline on its own.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

use spectral_corners::classify::{empirical_scan, Axis, ScanConfig};
use spectral_corners::families::{dense_truncation, Family, FamilyParams};
use spectral_corners::fastops::{LinearOperatorHandle, SymOperator};
use spectral_corners::spectra::eig_dense;

fn pools() -> Vec<(String, ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut out = vec![("threads-1".to_string(), build(1))];
    if default > 1 {
        out.push((format!("threads-{default}"), build(default)));
    }
    out
}

fn build(threads: usize) -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for fam in Family::ALL {
        let p = FamilyParams::new(fam, 2.0, 1.0, (fam == Family::A).then_some(0.5)).unwrap();
        let n = 100_000;
        let h = LinearOperatorHandle::new(&p, n).unwrap();
        let x = vec![1.0; n];
        let mut y = vec![0.0; n];
        for (label, pool) in pools() {
            group.bench_function(BenchmarkId::new(format!("{fam}"), &label), |b| {
                b.iter(|| pool.install(|| h.apply_into(&x, &mut y).unwrap()))
            });
        }
    }
    group.finish();
}

fn dense(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense");
    group.sample_size(10);
    let p = FamilyParams::c(2.0, 1.0).unwrap();
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new("truncation-C-512", &label), |b| {
            b.iter(|| pool.install(|| dense_truncation(&p, 512).unwrap()))
        });
        let m = dense_truncation(&FamilyParams::b(1.0, 1.0).unwrap(), 128).unwrap();
        group.bench_function(BenchmarkId::new("jacobi-B-128", &label), |b| {
            b.iter(|| pool.install(|| eig_dense(&m).unwrap()))
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    let config = ScanConfig {
        tau: Axis::new(-2.5, 2.5, 7).unwrap(),
        rho: Axis::new(-2.5, 2.5, 7).unwrap(),
        sizes: vec![64, 128, 256],
        ..ScanConfig::standard(Family::B)
    };
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new("B-7x7", &label), |b| {
            b.iter(|| pool.install(|| empirical_scan(&config).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, matvec, dense, scan);
criterion_main!(benches);
