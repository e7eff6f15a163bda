//! Sequential versus rayon execution of the data-parallel kernels.
//!
//! On a single-core machine both columns should match; the parallel column
//! only pulls ahead with several hardware threads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gauss_spectral::cf_core::PartitionSpec;
use gauss_spectral::holder::norm_defect_estimate_with;
use gauss_spectral::parallel::Exec;
use gauss_spectral::scan::scan_line_with;
use gauss_spectral::transfer::{build_collocation_with, BetaParam, DEFAULT_TOL};
use num_complex::Complex64;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn collocation(c: &mut Criterion) {
    let beta = BetaParam::auto(Complex64::new(0.5, 9.53)).unwrap();
    let mut g = c.benchmark_group("build_collocation");
    for n in [32, 64] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| build_collocation_with(black_box(&beta), n, None, DEFAULT_TOL, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan_line");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| scan_line_with(0.5, 9.0, 10.0, 0.1, 32, exec).unwrap()));
    }
    g.finish();
}

fn defect(c: &mut Criterion) {
    let spec = PartitionSpec::new(1, 16, 16).unwrap();
    let beta = Complex64::new(1.0, 0.0);
    let mut g = c.benchmark_group("norm_defect_estimate");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| norm_defect_estimate_with(beta, 0.6, 1, &spec, 4, 0, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, collocation, scan, defect);
criterion_main!(benches);
