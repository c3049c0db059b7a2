use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psclab::chart::{scal, scalar_curvature, Method};
use psclab::killing::scal_variation;
use psclab::models::InvariantModel;
use psclab_bench::{deformations, sphere, warped};
use std::hint::black_box;

fn curvature(c: &mut Criterion) {
    let s = sphere().chart();
    let w = warped().chart();
    let xs = [0.9, 0.4];
    let xw = [1.3, 0.2, 0.8];
    let mut g = c.benchmark_group("scal");
    for method in [Method::Analytic, Method::FiniteDifference] {
        g.bench_with_input(BenchmarkId::new("sphere", method), &method, |b, &m| {
            b.iter(|| scal(&s, black_box(&xs), m))
        });
        g.bench_with_input(BenchmarkId::new("warped3", method), &method, |b, &m| {
            b.iter(|| scal(&w, black_box(&xw), m))
        });
    }
    g.finish();

    c.bench_function("full_report/warped3", |b| {
        b.iter(|| scalar_curvature(&w, black_box(&xw), Method::Analytic))
    });
}

fn variation(c: &mut Criterion) {
    let m = warped();
    let params = deformations(4);
    let x = m.interior_points(1, 0.5)[0].clone();
    let mut g = c.benchmark_group("scal_variation");
    for method in [Method::Analytic, Method::FiniteDifference] {
        g.bench_with_input(BenchmarkId::new("warped3", method), &method, |b, &meth| {
            b.iter(|| {
                params
                    .iter()
                    .map(|p| scal_variation(&m, p, black_box(&x), meth).map(|r| r.rel_err))
                    .collect::<Vec<_>>()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, curvature, variation);
criterion_main!(benches);
