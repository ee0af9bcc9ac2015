//! Invariance factors and scale-invariant divergences.
//!
//! A factor `K(p, q) > 0` that is homogeneous of degree -1 in `q` makes
//! `D(p || K q)` unchanged under `q <- λ q`. The nominal factor of a family
//! is the stationary point of `K -> D(p || K q)`; when it has no closed form
//! the fallback `K* = Σp / Σq` is used, which amounts to evaluating the
//! divergence on normalized fields times `Σp`.

use serde::{Deserialize, Serialize};

use crate::deformed_log::ln_ratio;
use crate::divergences::{check_excluded, mean_split, DivergenceParams, MeanKind};
use crate::error::{param_err, Result};
use crate::field::{same_len, Field};
use crate::verify::{fd_gradient, FdSpec};

/// Families with a closed-form nominal factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NominalFamily {
    Alpha,
    Beta,
    AlphaBeta,
    DualKl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Nominal,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceFactor {
    pub kind: FactorKind,
    pub value: f64,
    /// `None` for `K*`, which is shared by every family.
    pub family: Option<NominalFamily>,
}

/// `K* = Σp / Σq`.
pub fn star_factor(p: &Field, q: &Field) -> Result<InvarianceFactor> {
    same_len(p, q)?;
    Ok(InvarianceFactor {
        kind: FactorKind::Star,
        value: p.total() / q.total(),
        family: None,
    })
}

fn pow(x: f64, e: f64) -> f64 {
    x.powf(e)
}

/// Closed-form nominal factor of `family`.
///
/// * α: `(Σ p^α q^(1-α) / Σ q)^(1/α)`
/// * β: `Σ p q^(β-1) / Σ q^β`
/// * αβ: `(Σ p^α q^(β-1) / Σ q^(α+β-1))^(1/α)`
/// * dual KL: `exp(Σ q ln(p/q) / Σ q)`
pub fn nominal_factor(family: NominalFamily, p: &Field, q: &Field, dp: &DivergenceParams) -> Result<InvarianceFactor> {
    same_len(p, q)?;
    let pairs = || p.iter().copied().zip(q.iter().copied());
    let value = match family {
        NominalFamily::Alpha => {
            let al = dp.alpha;
            check_excluded("alpha", al, 0.0)?;
            check_excluded("alpha", al, 1.0)?;
            let geo: f64 = pairs().map(|(pi, qi)| pow(pi, al) * pow(qi, 1.0 - al)).sum();
            pow(geo / q.total(), 1.0 / al)
        }
        NominalFamily::Beta => {
            let be = dp.beta;
            check_excluded("beta", be, 0.0)?;
            check_excluded("beta", be, 1.0)?;
            let num: f64 = pairs().map(|(pi, qi)| pi * pow(qi, be - 1.0)).sum();
            let den: f64 = q.iter().map(|&qi| pow(qi, be)).sum();
            num / den
        }
        NominalFamily::AlphaBeta => {
            let (al, be) = (dp.alpha, dp.beta);
            check_excluded("alpha", al, 0.0)?;
            check_excluded("beta", be, 1.0)?;
            check_excluded("alpha + beta", al + be, 1.0)?;
            let num: f64 = pairs().map(|(pi, qi)| pow(pi, al) * pow(qi, be - 1.0)).sum();
            let den: f64 = q.iter().map(|&qi| pow(qi, al + be - 1.0)).sum();
            pow(num / den, 1.0 / al)
        }
        NominalFamily::DualKl => {
            let cross: f64 = pairs().map(|(pi, qi)| qi * (pi / qi).ln()).sum();
            (cross / q.total()).exp()
        }
    };
    Ok(InvarianceFactor {
        kind: FactorKind::Nominal,
        value,
        family: Some(family),
    })
}

// `A - X Y` equals the base divergence at `(p, K0 q)` over `T`. With
// `L = ln(K0 q / p)` each base term is a combination of `expm1` calls whose
// first-order parts cancel exactly.
fn product_gap(family: NominalFamily, p: &Field, q: &Field, dp: &DivergenceParams, k0: f64) -> Result<f64> {
    let (al, be) = (dp.alpha, dp.beta);
    let term: Box<dyn Fn(f64, f64) -> f64> = match family {
        NominalFamily::Alpha => {
            Box::new(move |pi, l| pi * ((1.0 - al) * l.exp_m1() - ((1.0 - al) * l).exp_m1()) / al)
        }
        NominalFamily::Beta => {
            Box::new(move |pi, l| pow(pi, be) * ((be - 1.0) * (be * l).exp_m1() - be * ((be - 1.0) * l).exp_m1()))
        }
        NominalFamily::AlphaBeta => {
            let e = al + be - 1.0;
            Box::new(move |pi, l| {
                pow(pi, e) * ((be - 1.0) * (e * l).exp_m1() - e * ((be - 1.0) * l).exp_m1()) / al
            })
        }
        NominalFamily::DualKl => return Err(param_err("the nominal dual KL divergence has no product gap")),
    };
    Ok(p.iter().zip(q.iter()).map(|(&pi, &qi)| term(pi, ln_ratio(k0 * qi, pi))).sum())
}

/// Sign case of a product split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductCase {
    AlphaPositive,
    AlphaNegative,
    Beta,
    AlphaBetaPositive,
    AlphaBetaNegative,
}

/// `T [A - X Y]` with `A, X, Y > 0`. `A` does not depend on `q`; `X` and `Y`
/// are not separable and carry full gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSplit {
    pub t: f64,
    pub a: f64,
    pub x: f64,
    pub y: f64,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    /// `A - X Y`, summed term by term so that it keeps relative precision
    /// near proportionality.
    pub gap: f64,
    pub case: ProductCase,
}

impl ProductSplit {
    pub fn value(&self) -> f64 {
        self.t * self.gap
    }

    /// `∂(X Y)/∂q_j = Y ∂X/∂q_j + X ∂Y/∂q_j`
    pub fn d_product(&self) -> Vec<f64> {
        self.dx.iter().zip(&self.dy).map(|(dx, dy)| self.y * dx + self.x * dy).collect()
    }

    /// Gradient of `T (A - X Y)` in `q`.
    pub fn gradient(&self) -> Vec<f64> {
        self.d_product().iter().map(|d| -self.t * d).collect()
    }
}

/// Invariant α, β or αβ divergence obtained with the nominal factor.
pub fn invariant_split(family: NominalFamily, p: &Field, q: &Field, dp: &DivergenceParams) -> Result<ProductSplit> {
    same_len(p, q)?;
    let gap = || product_gap(family, p, q, dp, nominal_factor(family, p, q, dp)?.value);
    let pairs = || p.iter().copied().zip(q.iter().copied());
    match family {
        NominalFamily::Alpha => {
            let al = dp.alpha;
            check_excluded("alpha", al, 0.0)?;
            check_excluded("alpha", al, 1.0)?;
            let geo: f64 = pairs().map(|(pi, qi)| pow(pi, al) * pow(qi, 1.0 - al)).sum();
            let sq = q.total();
            let x = pow(geo, 1.0 / al);
            let y = pow(sq, 1.0 - 1.0 / al);
            let cx = (1.0 - al) / al * pow(geo, 1.0 / al - 1.0);
            let cy = (al - 1.0) / al * pow(sq, -1.0 / al);
            Ok(ProductSplit {
                t: 1.0 / (1.0 - al),
                a: p.total(),
                x,
                y,
                dx: pairs().map(|(pi, qi)| cx * pow(pi / qi, al)).collect(),
                dy: vec![cy; q.len()],
                gap: gap()?,
                case: if al > 0.0 {
                    ProductCase::AlphaPositive
                } else {
                    ProductCase::AlphaNegative
                },
            })
        }
        NominalFamily::Beta => {
            let be = dp.beta;
            check_excluded("beta", be, 0.0)?;
            check_excluded("beta", be, 1.0)?;
            let cross: f64 = pairs().map(|(pi, qi)| pi * pow(qi, be - 1.0)).sum();
            let qb: f64 = q.iter().map(|&qi| pow(qi, be)).sum();
            let cx = be * (be - 1.0) * pow(cross, be - 1.0);
            let cy = be * (1.0 - be) * pow(qb, -be);
            Ok(ProductSplit {
                t: 1.0 / (be * (be - 1.0)),
                a: p.iter().map(|&pi| pow(pi, be)).sum(),
                x: pow(cross, be),
                y: pow(qb, 1.0 - be),
                dx: pairs().map(|(pi, qi)| cx * pi * pow(qi, be - 2.0)).collect(),
                dy: q.iter().map(|&qi| cy * pow(qi, be - 1.0)).collect(),
                gap: gap()?,
                case: ProductCase::Beta,
            })
        }
        NominalFamily::AlphaBeta => {
            let (al, be) = (dp.alpha, dp.beta);
            check_excluded("alpha", al, 0.0)?;
            check_excluded("beta", be, 1.0)?;
            check_excluded("alpha + beta", al + be, 1.0)?;
            let e = al + be - 1.0;
            let cross: f64 = pairs().map(|(pi, qi)| pow(pi, al) * pow(qi, be - 1.0)).sum();
            let qe: f64 = q.iter().map(|&qi| pow(qi, e)).sum();
            let cx = e * (be - 1.0) / al * pow(cross, (be - 1.0) / al);
            let cy = e * (1.0 - be) / al * pow(qe, -e / al);
            Ok(ProductSplit {
                t: 1.0 / ((be - 1.0) * e),
                a: p.iter().map(|&pi| pow(pi, e)).sum(),
                x: pow(cross, e / al),
                y: pow(qe, (1.0 - be) / al),
                dx: pairs().map(|(pi, qi)| cx * pow(pi, al) * pow(qi, be - 2.0)).collect(),
                dy: q.iter().map(|&qi| cy * pow(qi, e - 1.0)).collect(),
                gap: gap()?,
                case: if al > 0.0 {
                    ProductCase::AlphaBetaPositive
                } else {
                    ProductCase::AlphaBetaNegative
                },
            })
        }
        NominalFamily::DualKl => Err(param_err(
            "the nominal dual KL divergence is not a product split; use invariant_value",
        )),
    }
}

/// Fields divided by their sums, with the sums kept.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPair {
    pub p_bar: Field,
    pub q_bar: Field,
    pub sp: f64,
    pub sq: f64,
}

impl NormalizedPair {
    /// `K* = Σp / Σq`
    pub fn star(&self) -> f64 {
        self.sp / self.sq
    }
}

pub fn normalized_fields(p: &Field, q: &Field) -> Result<NormalizedPair> {
    same_len(p, q)?;
    let (sp, sq) = (p.total(), q.total());
    Ok(NormalizedPair {
        p_bar: Field::new(p.iter().map(|v| v / sp).collect())?,
        q_bar: Field::new(q.iter().map(|v| v / sq).collect())?,
        sp,
        sq,
    })
}

/// Scale-invariant divergences without a product-split form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantFamily {
    GeometricHarmonic,
    ArithmeticGeometric,
    ArithmeticHarmonic,
    F,
    G,
    DualKlStar,
    DualKlNominal,
}

/// Value of an invariant divergence. All but the nominal dual KL form use
/// `K*`, i.e. `Σp` times the base divergence of the normalized fields.
pub fn invariant_value(family: InvariantFamily, p: &Field, q: &Field, alpha: f64) -> Result<f64> {
    let np = normalized_fields(p, q)?;
    let (pb, qb) = (&np.p_bar, &np.q_bar);
    let bars = || pb.iter().copied().zip(qb.iter().copied());
    let inner = match family {
        InvariantFamily::GeometricHarmonic => mean_split(MeanKind::GeometricHarmonic, pb, qb, alpha)?.value(),
        InvariantFamily::ArithmeticGeometric => mean_split(MeanKind::ArithmeticGeometric, pb, qb, alpha)?.value(),
        InvariantFamily::ArithmeticHarmonic => mean_split(MeanKind::ArithmeticHarmonic, pb, qb, alpha)?.value(),
        InvariantFamily::F => {
            crate::divergences::check_unit_interval(alpha, false)?;
            bars().map(|(a, b)| a * ln_ratio(a, alpha * a + (1.0 - alpha) * b)).sum()
        }
        InvariantFamily::G => {
            crate::divergences::check_unit_interval(alpha, false)?;
            bars()
                .map(|(a, b)| {
                    let t = alpha * a + (1.0 - alpha) * b;
                    t * ln_ratio(t, a)
                })
                .sum()
        }
        InvariantFamily::DualKlStar => bars().map(|(a, b)| b * ln_ratio(b, a)).sum(),
        InvariantFamily::DualKlNominal => {
            let k0 = nominal_factor(NominalFamily::DualKl, p, q, &DivergenceParams::default())?.value;
            return Ok(np.sp - k0 * np.sq);
        }
    };
    Ok(np.sp * inner)
}

/// `K(p, q) + Σ_j q_j ∂K/∂q_j` by central differences with step `1e-6 q_j`.
/// Zero for every factor homogeneous of degree -1 in `q`.
pub fn factor_ode_residual<K>(factor: K, p: &Field, q: &Field) -> f64
where
    K: Fn(&Field, &Field) -> f64,
{
    let k = factor(p, q);
    let grad = fd_gradient(|x| factor(p, x), q, &FdSpec::default()).expect("default step keeps q positive");
    k + q.iter().zip(&grad).map(|(qj, gj)| qj * gj).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{alpha_split, alphabeta_split, beta_split, dual_kl};
    use crate::verify::{random_field, scan_minimize};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(v: &[f64]) -> Field {
        Field::from_slice(v).unwrap()
    }

    #[test]
    fn star_factor_examples() {
        assert_eq!(star_factor(&f(&[1.0, 3.0]), &f(&[2.0, 2.0])).unwrap().value, 1.0);
        assert_eq!(star_factor(&f(&[1.0, 3.0]), &f(&[4.0, 4.0])).unwrap().value, 0.5);
        let p = f(&[0.7, 2.0]);
        assert_eq!(star_factor(&p, &p).unwrap().value, 1.0);
    }

    #[test]
    fn nominal_factor_examples() {
        let k = nominal_factor(NominalFamily::Beta, &f(&[2.0]), &f(&[1.0]), &DivergenceParams::beta(2.0)).unwrap();
        assert_eq!(k.value, 2.0);
        let p = f(&[0.3, 1.9, 4.0]);
        let k = nominal_factor(NominalFamily::Alpha, &p, &p, &DivergenceParams::alpha(0.6)).unwrap();
        assert!((k.value - 1.0).abs() < 1e-14);
        assert!(nominal_factor(NominalFamily::Alpha, &p, &p, &DivergenceParams::alpha(1.0)).is_err());
    }

    #[test]
    fn nominal_factor_minimizes_scaled_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let p = random_field(&mut rng, 8, 0.1, 10.0);
            let q = random_field(&mut rng, 8, 0.1, 10.0);
            let cases: Vec<(NominalFamily, DivergenceParams, Box<dyn Fn(&Field) -> f64>)> = vec![
                (NominalFamily::Alpha, DivergenceParams::alpha(0.5), Box::new(|x: &Field| alpha_split(&p, x, &DivergenceParams::alpha(0.5)).unwrap().value())),
                (NominalFamily::Alpha, DivergenceParams::alpha(-0.7), Box::new(|x: &Field| alpha_split(&p, x, &DivergenceParams::alpha(-0.7)).unwrap().value())),
                (NominalFamily::Beta, DivergenceParams::beta(1.5), Box::new(|x: &Field| beta_split(&p, x, &DivergenceParams::beta(1.5)).unwrap().value())),
                (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(0.8, 0.5), Box::new(|x: &Field| alphabeta_split(&p, x, &DivergenceParams::alpha_beta(0.8, 0.5)).unwrap().value())),
                (NominalFamily::DualKl, DivergenceParams::default(), Box::new(|x: &Field| dual_kl(&p, x).unwrap())),
            ];
            for (family, dp, d) in cases {
                let k0 = nominal_factor(family, &p, &q, &dp).unwrap().value;
                let scan = scan_minimize(|k| d(&q.scaled(k).unwrap()), (k0 * 1e-3, k0 * 1e3)).unwrap();
                assert!((scan - k0).abs() <= 1e-6 * k0, "{family:?}: {scan} vs {k0}");
            }
        }
    }

    #[test]
    fn invariant_split_equals_base_at_nominal_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = random_field(&mut rng, 8, 0.1, 10.0);
            let q = random_field(&mut rng, 8, 0.1, 10.0);
            for (family, dp) in [
                (NominalFamily::Alpha, DivergenceParams::alpha(0.5)),
                (NominalFamily::Alpha, DivergenceParams::alpha(2.0)),
                (NominalFamily::Alpha, DivergenceParams::alpha(-1.0)),
                (NominalFamily::Beta, DivergenceParams::beta(0.5)),
                (NominalFamily::Beta, DivergenceParams::beta(2.5)),
                (NominalFamily::Beta, DivergenceParams::beta(-0.5)),
                (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(2.0, 2.0)),
                (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(-1.0, 0.5)),
            ] {
                let k0 = nominal_factor(family, &p, &q, &dp).unwrap().value;
                let kq = q.scaled(k0).unwrap();
                let base = match family {
                    NominalFamily::Alpha => alpha_split(&p, &kq, &dp).unwrap(),
                    NominalFamily::Beta => beta_split(&p, &kq, &dp).unwrap(),
                    _ => alphabeta_split(&p, &kq, &dp).unwrap(),
                };
                let inv = invariant_split(family, &p, &q, &dp).unwrap();
                assert!(inv.a > 0.0 && inv.x > 0.0 && inv.y > 0.0);
                assert!(inv.value() >= -1e-12 * inv.t.abs() * (inv.a + inv.x * inv.y));
                assert!((inv.value() - base.value()).abs() <= 1e-11 * (base.a + base.b), "{family:?} {dp:?}");
            }
        }
    }

    #[test]
    fn invariant_split_vanishes_at_proportionality() {
        let p = f(&[0.5, 1.5, 2.0, 6.0]);
        let q3 = p.scaled(3.0).unwrap();
        for (family, dp) in [
            (NominalFamily::Alpha, DivergenceParams::alpha(0.3)),
            (NominalFamily::Beta, DivergenceParams::beta(2.0)),
            (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(-1.0, 3.0)),
        ] {
            let s = invariant_split(family, &p, &p, &dp).unwrap();
            assert!((s.a - s.x * s.y).abs() < 1e-13 * s.a);
            assert!(invariant_split(family, &p, &q3, &dp).unwrap().value().abs() < 1e-12);
        }
    }

    #[test]
    fn product_derivatives_match_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = FdSpec::default();
        for (family, dp) in [
            (NominalFamily::Alpha, DivergenceParams::alpha(0.4)),
            (NominalFamily::Alpha, DivergenceParams::alpha(-0.8)),
            (NominalFamily::Beta, DivergenceParams::beta(1.7)),
            (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(0.2, 0.5)),
            (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(-2.0, 1.5)),
        ] {
            for _ in 0..20 {
                let p = random_field(&mut rng, 8, 0.1, 10.0);
                let q = random_field(&mut rng, 8, 0.1, 10.0);
                let s = invariant_split(family, &p, &q, &dp).unwrap();
                let fx = fd_gradient(|z| invariant_split(family, &p, z, &dp).unwrap().x, &q, &spec).unwrap();
                let fy = fd_gradient(|z| invariant_split(family, &p, z, &dp).unwrap().y, &q, &spec).unwrap();
                for j in 0..8 {
                    assert!((s.dx[j] - fx[j]).abs() <= 1e-5 * s.dx[j].abs().max(1e-12));
                    assert!((s.dy[j] - fy[j]).abs() <= 1e-5 * s.dy[j].abs().max(1e-12));
                }
            }
        }
    }

    #[test]
    fn normalized_fields_examples() {
        let np = normalized_fields(&f(&[1.0, 3.0]), &f(&[2.0, 5.0, 1.0][..2])).unwrap();
        assert_eq!(np.p_bar.as_slice(), &[0.25, 0.75]);
        assert!((np.q_bar.total() - 1.0).abs() <= 1e-12);
        let again = normalized_fields(&np.p_bar, &np.q_bar).unwrap();
        for (a, b) in again.p_bar.iter().zip(np.p_bar.iter()).chain(again.q_bar.iter().zip(np.q_bar.iter())) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    const FAMILIES: [InvariantFamily; 7] = [
        InvariantFamily::GeometricHarmonic,
        InvariantFamily::ArithmeticGeometric,
        InvariantFamily::ArithmeticHarmonic,
        InvariantFamily::F,
        InvariantFamily::G,
        InvariantFamily::DualKlStar,
        InvariantFamily::DualKlNominal,
    ];

    #[test]
    fn invariant_values_scale_free_and_zero_at_proportionality() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let p = random_field(&mut rng, 8, 0.1, 10.0);
            let q = random_field(&mut rng, 8, 0.1, 10.0);
            for family in FAMILIES {
                let d = invariant_value(family, &p, &q, 0.4).unwrap();
                assert!(d >= -1e-12, "{family:?}");
                for lambda in [0.1, 3.0, 10.0] {
                    let dl = invariant_value(family, &p, &q.scaled(lambda).unwrap(), 0.4).unwrap();
                    assert!((dl - d).abs() <= 1e-9 * (1.0 + d.abs()), "{family:?}");
                }
                assert!(invariant_value(family, &p, &p.scaled(2.5).unwrap(), 0.4).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ghi_equals_scaled_normalized_mean_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = random_field(&mut rng, 8, 0.1, 10.0);
        let q = random_field(&mut rng, 8, 0.1, 10.0);
        let sp = p.total();
        let sq = q.total();
        let (mut mg, mut mh) = (0.0, 0.0);
        for (a, b) in p.iter().zip(q.iter()) {
            let (a, b) = (a / sp, b / sq);
            mg += a.powf(0.3) * b.powf(0.7);
            mh += a * b / (0.7 * a + 0.3 * b);
        }
        let v = invariant_value(InvariantFamily::GeometricHarmonic, &p, &q, 0.3).unwrap();
        assert!((v - sp * (mg - mh)).abs() < 1e-12 * sp);
    }

    #[test]
    fn dual_kl_nominal_matches_scaled_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = random_field(&mut rng, 8, 0.1, 10.0);
        let q = random_field(&mut rng, 8, 0.1, 10.0);
        let k0 = nominal_factor(NominalFamily::DualKl, &p, &q, &DivergenceParams::default()).unwrap().value;
        let base = dual_kl(&p, &q.scaled(k0).unwrap()).unwrap();
        let inv = invariant_value(InvariantFamily::DualKlNominal, &p, &q, 0.0).unwrap();
        assert!((base - inv).abs() < 1e-12 * p.total());
    }

    #[test]
    fn ode_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let p = random_field(&mut rng, 8, 0.1, 10.0);
            let q = random_field(&mut rng, 8, 0.1, 10.0);
            let star = |p: &Field, q: &Field| star_factor(p, q).unwrap().value;
            let k = star(&p, &q);
            assert!(factor_ode_residual(star, &p, &q).abs() <= 1e-6 * k);
            for (family, dp) in [
                (NominalFamily::Alpha, DivergenceParams::alpha(0.5)),
                (NominalFamily::Beta, DivergenceParams::beta(2.0)),
                (NominalFamily::AlphaBeta, DivergenceParams::alpha_beta(-1.0, 3.0)),
                (NominalFamily::DualKl, DivergenceParams::default()),
            ] {
                let kf = |p: &Field, q: &Field| nominal_factor(family, p, q, &dp).unwrap().value;
                let k = kf(&p, &q);
                assert!(factor_ode_residual(kf, &p, &q).abs() <= 1e-6 * k, "{family:?}");
                // K q is unchanged by rescaling q.
                let k3 = kf(&p, &q.scaled(3.0).unwrap());
                assert!((3.0 * k3 - k).abs() <= 1e-12 * k);
            }
            // a constant factor violates the equation
            let r = factor_ode_residual(|_, _| 2.0, &p, &q);
            assert!((r - 2.0).abs() < 1e-9);
        }
    }
}
