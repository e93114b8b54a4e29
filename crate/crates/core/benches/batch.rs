use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ckgraph::batch;
use ckgraph::verify;

fn formula(seed: u64) -> bool {
    verify::check_finite_formula(&verify::finite_graph(seed)).map(|c| c.passed()).unwrap_or(false)
}

fn shrink(seed: u64) -> bool {
    let (g, trees) = verify::shrink_instance(seed);
    verify::check_shrink(&g, &trees).map(|c| c.passed()).unwrap_or(false)
}

fn reduction(seed: u64) -> bool {
    verify::check_reduction(&verify::finite_graph(seed)).map(|c| c.passed()).unwrap_or(false)
}

type Check = fn(u64) -> bool;

fn compare(c: &mut Criterion) {
    let checks: [(&str, Check); 3] = [("finite-formula", formula), ("shrink", shrink), ("reduction", reduction)];
    for (name, check) in checks {
        let mut group = c.benchmark_group(name);
        group.sample_size(10);
        for count in [8u64, 32] {
            group.bench_with_input(BenchmarkId::new("sequential", count), &count, |b, &n| {
                b.iter(|| batch::map_sequential(0..black_box(n), check))
            });
            #[cfg(feature = "parallel")]
            group.bench_with_input(BenchmarkId::new("parallel", count), &count, |b, &n| {
                b.iter(|| batch::map_parallel(0..black_box(n), check))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, compare);
criterion_main!(benches);
