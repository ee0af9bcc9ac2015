use criterion::{criterion_group, criterion_main, Criterion};
use divgrad_bench::objectives;
use divgrad_core::fixtures::deconvolution_fixture;
use divgrad_core::solver::sgm_solve;
use divgrad_core::{Algorithm, DivergenceParams, Family, Objective, SolverOptions, Transform, Variant};

fn solve(c: &mut Criterion) {
    let f = deconvolution_fixture();
    let kl = Objective::new(Family::F, Variant::Base, DivergenceParams::alpha(0.0), Transform::Plain).unwrap();
    let mut group = c.benchmark_group("solve_deconv32");
    group.sample_size(10);
    for algorithm in [Algorithm::Additive, Algorithm::Preconditioned, Algorithm::Multiplicative] {
        let opts = SolverOptions { algorithm, ..SolverOptions::default() };
        group.bench_function(format!("kl_{algorithm:?}"), |b| b.iter(|| sgm_solve(&f.model, &kl, &f.x0, &opts).unwrap()));
    }
    let (_, beta) = objectives().into_iter().find(|(n, _)| *n == "beta_invariant_ld").unwrap();
    let opts = SolverOptions {
        algorithm: Algorithm::Preconditioned,
        sum_constraint: Some(f.x0.iter().sum()),
        ..SolverOptions::default()
    };
    group.bench_function("beta_invariant_normalized", |b| b.iter(|| sgm_solve(&f.model, &beta, &f.x0, &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, solve);
criterion_main!(benches);
