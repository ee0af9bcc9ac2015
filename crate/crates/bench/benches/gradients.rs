use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use divgrad_bench::{fields, objectives};
use std::hint::black_box;

fn evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for n in [8, 64] {
        let (p, q) = fields(n);
        for (name, obj) in objectives() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| obj.evaluate(black_box(&p), black_box(&q)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, evaluate);
criterion_main!(benches);
