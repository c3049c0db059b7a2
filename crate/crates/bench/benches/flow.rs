use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psclab::embed::{embed_profile, EmbedOptions};
use psclab::flow::{advance, FlowSpec, PointwiseState};
use psclab_bench::{sphere, sphere_grid};
use std::hint::black_box;

fn pointwise(c: &mut Criterion) {
    c.bench_function("pointwise/advance_to_1.5", |b| {
        let st = PointwiseState::initial(0.7, 2, 1.0).unwrap();
        b.iter(|| advance(black_box(&st), 1.5, 1e-10))
    });
}

fn grid(c: &mut Criterion) {
    let times: Vec<f64> = (0..=6).map(|k| 0.25 * k as f64).collect();
    let mut g = c.benchmark_group("sample_grid");
    g.sample_size(10);
    for nodes in [50, 200] {
        let grid = sphere_grid(nodes);
        let spec = FlowSpec::new(sphere(), 1.0, 1e-10).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &grid, |b, grid| {
            b.iter(|| spec.sample_grid(grid, &times))
        });
    }
    g.finish();
}

fn embedding(c: &mut Criterion) {
    let spec = FlowSpec::new(sphere(), 1.0, 1e-10).unwrap();
    let mut g = c.benchmark_group("embed_profile");
    g.sample_size(10);
    g.bench_function("eps1_s1_cells256", |b| {
        b.iter(|| {
            embed_profile(
                &spec,
                1.0,
                EmbedOptions {
                    cells: 256,
                    refine: 4,
                },
            )
        })
    });
    g.finish();
}

criterion_group!(benches, pointwise, grid, embedding);
criterion_main!(benches);
