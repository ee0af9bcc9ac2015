use std::path::Path;

use divgrad_core::fixtures::deconvolution_fixture;
use divgrad_core::solver::sgm_solve;
use divgrad_core::textio::{format_matrix, format_vector, parse_matrix, parse_vector};
use divgrad_core::{
    Algorithm, DivergenceParams, Family, LogParams, Objective, SolveOutcome, SolverOptions, Transform, Variant,
};

const SLACK: f64 = 1e-12;

fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/deconv32"))
}

fn kl() -> Objective {
    Objective::new(Family::F, Variant::Base, DivergenceParams::alpha(0.0), Transform::Plain).unwrap()
}

fn invariant_objectives() -> Vec<Objective> {
    let ld = Transform::Log(LogParams::new(1.5, 0.5).unwrap());
    let inv = |family, dp, tr| Objective::new(family, Variant::Invariant, dp, tr).unwrap();
    vec![
        inv(Family::Alpha, DivergenceParams::alpha(0.5), Transform::Plain),
        inv(Family::Beta, DivergenceParams::beta(1.5), ld),
        inv(Family::AlphaBeta, DivergenceParams::alpha_beta(0.8, 0.5), Transform::Plain),
        inv(Family::GeometricHarmonic, DivergenceParams::alpha(0.3), Transform::Plain),
        inv(Family::F, DivergenceParams::alpha(0.0), Transform::Plain),
        inv(Family::DualKl, DivergenceParams::default(), Transform::Plain),
    ]
}

fn run(obj: &Objective, algorithm: Algorithm, sum: Option<f64>) -> SolveOutcome {
    let f = deconvolution_fixture();
    let opts = SolverOptions {
        algorithm,
        sum_constraint: sum,
        ..SolverOptions::default()
    };
    sgm_solve(&f.model, obj, &f.x0, &opts).unwrap_or_else(|e| panic!("{obj:?} {algorithm:?}: {e}"))
}

fn reduction(out: &SolveOutcome) -> f64 {
    let d0 = out.trace.initial().unwrap().divergence;
    1.0 - out.trace.last().unwrap().divergence / d0
}

#[test]
fn committed_fixture_files_match_generator() {
    let f = deconvolution_fixture();
    let m = &f.model;
    let expected = [
        ("H.csv", format_matrix(m.rows(), m.cols(), m.matrix())),
        ("y.csv", format_vector(m.y().as_slice())),
        ("x_true.csv", format_vector(&f.x_true)),
        ("x0.csv", format_vector(&f.x0)),
    ];
    for (name, text) in &expected {
        let on_disk = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
        assert_eq!(&on_disk, text, "{name} is stale; rerun the write_fixture example");
    }
    let (rows, cols, h) = parse_matrix(&expected[0].1).unwrap();
    assert_eq!((rows, cols, h.as_slice()), (32, 32, m.matrix()));
    assert_eq!(parse_vector(&expected[1].1).unwrap(), m.y().as_slice());
}

#[test]
fn line_searched_runs_descend_monotonically() {
    let mut objectives = vec![kl()];
    objectives.extend(invariant_objectives());
    for obj in &objectives {
        for algorithm in [Algorithm::Additive, Algorithm::Preconditioned] {
            let out = run(obj, algorithm, None);
            assert!(out.trace.iterations() <= 500);
            assert!(out.trace.increases(SLACK).is_empty(), "{obj:?} {algorithm:?}");
            assert!(reduction(&out) >= 0.99, "{obj:?} {algorithm:?}: {}", reduction(&out));
            assert!(out.x.iter().all(|&v| v > 0.0));
        }
    }
}

#[test]
fn multiplicative_kl_reduces_divergence() {
    let out = run(&kl(), Algorithm::Multiplicative, None);
    assert!(reduction(&out) >= 0.99, "{}", reduction(&out));
    assert!(out.x.iter().all(|&v| v > 0.0));
}

#[test]
fn invariant_additive_runs_conserve_sum() {
    let f = deconvolution_fixture();
    let s0: f64 = f.x0.iter().sum();
    for obj in invariant_objectives() {
        let out = run(&obj, Algorithm::Additive, None);
        for r in &out.trace.records {
            assert!((r.sum_x - s0).abs() <= 1e-10 * s0, "{obj:?} k={} drift {:e}", r.k, r.sum_x - s0);
        }
    }
}

#[test]
fn normalized_runs_restore_sum_and_keep_value() {
    let f = deconvolution_fixture();
    let c: f64 = f.x0.iter().sum();
    for obj in invariant_objectives() {
        for algorithm in [Algorithm::Preconditioned, Algorithm::Multiplicative] {
            let out = run(&obj, algorithm, Some(c));
            for r in &out.trace.records {
                assert!((r.sum_x - c).abs() <= 1e-12 * c, "{obj:?} {algorithm:?} k={}", r.k);
                assert!(r.normalization <= 1e-10, "{obj:?} {algorithm:?} k={}: {:e}", r.k, r.normalization);
            }
            assert!(out.trace.increases(SLACK).is_empty(), "{obj:?} {algorithm:?}");
        }
    }
}

#[test]
fn sum_constraint_needs_invariant_objective() {
    let f = deconvolution_fixture();
    let c: f64 = f.x0.iter().sum();
    let opts = SolverOptions {
        algorithm: Algorithm::Multiplicative,
        sum_constraint: Some(c),
        ..SolverOptions::default()
    };
    assert!(sgm_solve(&f.model, &kl(), &f.x0, &opts).is_err());
}
