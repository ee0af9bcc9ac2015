//! Shared inputs for the benchmarks.

use divgrad_core::verify::random_field;
use divgrad_core::{DivergenceParams, Family, Field, LogParams, Objective, Transform, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 7;

/// A seeded pair of positive fields of length `n`.
pub fn fields(n: usize) -> (Field, Field) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let p = random_field(&mut rng, n, 0.1, 10.0);
    let q = random_field(&mut rng, n, 0.1, 10.0);
    (p, q)
}

/// One representative objective per family, labelled.
pub fn objectives() -> Vec<(&'static str, Objective)> {
    let ld = Transform::Log(LogParams::new(1.5, 0.5).expect("admissible"));
    let obj = |f, v, dp, t| Objective::new(f, v, dp, t).expect("admissible");
    vec![
        ("alpha_base_plain", obj(Family::Alpha, Variant::Base, DivergenceParams::alpha(0.5), Transform::Plain)),
        ("alpha_invariant_ld", obj(Family::Alpha, Variant::Invariant, DivergenceParams::alpha(0.5), ld)),
        ("beta_invariant_ld", obj(Family::Beta, Variant::Invariant, DivergenceParams::beta(1.5), ld)),
        (
            "alphabeta_invariant_plain",
            obj(Family::AlphaBeta, Variant::Invariant, DivergenceParams::alpha_beta(0.8, 0.5), Transform::Plain),
        ),
        ("gh_star_ld", obj(Family::GeometricHarmonic, Variant::Star, DivergenceParams::alpha(0.3), ld)),
        ("f_star_plain", obj(Family::F, Variant::Star, DivergenceParams::alpha(0.0), Transform::Plain)),
        ("dual_kl_star_ld", obj(Family::DualKl, Variant::Star, DivergenceParams::default(), ld)),
    ]
}
