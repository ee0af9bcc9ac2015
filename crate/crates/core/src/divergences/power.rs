//! α, β and αβ divergences.

use super::{check_excluded, AlphaBetaCase, BaseSplit, DivergenceParams, Partial, SplitCase};
use crate::error::Result;
use crate::field::{same_len, Field};

fn pow(x: f64, e: f64) -> f64 {
    x.powf(e)
}

/// α divergence
/// `1/(α(α-1)) [Σ p^α q^(1-α) - (α Σp + (1-α) Σq)]`
/// split into `A - B` according to the sign case of `α`.
pub fn alpha_split(p: &Field, q: &Field, dp: &DivergenceParams) -> Result<BaseSplit> {
    same_len(p, q)?;
    let al = dp.alpha;
    check_excluded("alpha", al, 0.0)?;
    check_excluded("alpha", al, 1.0)?;

    let sp = p.total();
    let sq = q.total();
    let geo: f64 = p.iter().zip(q.iter()).map(|(&pi, &qi)| pow(pi, al) * pow(qi, 1.0 - al)).sum();
    // p^α q^-α
    let ratio: Vec<f64> = p.iter().zip(q.iter()).map(|(&pi, &qi)| pow(pi / qi, al)).collect();
    let ones = vec![1.0; q.len()];

    let split = if al > 0.0 && al < 1.0 {
        BaseSplit {
            a: sp / (1.0 - al) + sq / al,
            b: geo / (al * (1.0 - al)),
            da: Partial::signed(1.0 / al, &ones),
            db: Partial::signed(1.0 / al, &ratio),
            case: SplitCase::AlphaBetween,
        }
    } else if al > 1.0 {
        BaseSplit {
            a: sq / al + geo / (al * (al - 1.0)),
            b: sp / (al - 1.0),
            da: Partial::signed(1.0 / al, &ones).with_signed(-1.0 / al, &ratio),
            db: Partial::zero(q.len()),
            case: SplitCase::AlphaAbove,
        }
    } else {
        BaseSplit {
            a: sp / (1.0 - al) + geo / (al * (al - 1.0)),
            b: -sq / al,
            da: Partial::signed(-1.0 / al, &ratio),
            db: Partial::signed(-1.0 / al, &ones),
            case: SplitCase::AlphaNegative,
        }
    };
    Ok(split)
}

/// β divergence
/// `1/(β(β-1)) Σ [p^β - β p q^(β-1) - (1-β) q^β]`.
pub fn beta_split(p: &Field, q: &Field, dp: &DivergenceParams) -> Result<BaseSplit> {
    same_len(p, q)?;
    let be = dp.beta;
    check_excluded("beta", be, 0.0)?;
    check_excluded("beta", be, 1.0)?;

    let pb: f64 = p.iter().map(|&pi| pow(pi, be)).sum();
    let cross: f64 = p.iter().zip(q.iter()).map(|(&pi, &qi)| pi * pow(qi, be - 1.0)).sum();
    let qb: f64 = q.iter().map(|&qi| pow(qi, be)).sum();
    // p q^(β-2) and q^(β-1)
    let pq: Vec<f64> = p.iter().zip(q.iter()).map(|(&pi, &qi)| pi * pow(qi, be - 2.0)).collect();
    let qq: Vec<f64> = q.iter().map(|&qi| pow(qi, be - 1.0)).collect();

    let split = if be > 0.0 && be < 1.0 {
        BaseSplit {
            a: cross / (1.0 - be) + qb / be,
            b: pb / (be * (1.0 - be)),
            da: Partial::signed(1.0, &qq).with_signed(-1.0, &pq),
            db: Partial::zero(q.len()),
            case: SplitCase::BetaBetween,
        }
    } else if be > 1.0 {
        BaseSplit {
            a: pb / (be * (be - 1.0)) + qb / be,
            b: cross / (be - 1.0),
            da: Partial::signed(1.0, &qq),
            db: Partial::signed(1.0, &pq),
            case: SplitCase::BetaAbove,
        }
    } else {
        BaseSplit {
            a: pb / (be * (be - 1.0)) - cross / (be - 1.0),
            b: -qb / be,
            da: Partial::signed(-1.0, &pq),
            db: Partial::signed(-1.0, &qq),
            case: SplitCase::BetaNegative,
        }
    };
    Ok(split)
}

/// αβ divergence
/// `T Σ [p^(α+β-1) + (β-1)/α q^(α+β-1) - (α+β-1)/α p^α q^(β-1)]`,
/// `T = 1/((β-1)(α+β-1))`.
pub fn alphabeta_split(p: &Field, q: &Field, dp: &DivergenceParams) -> Result<BaseSplit> {
    same_len(p, q)?;
    let (al, be) = (dp.alpha, dp.beta);
    check_excluded("alpha", al, 0.0)?;
    check_excluded("beta", be, 1.0)?;
    check_excluded("alpha + beta", al + be, 1.0)?;
    let case = AlphaBetaCase::classify(al, be)?;

    let e = al + be - 1.0;
    let pe: f64 = p.iter().map(|&pi| pow(pi, e)).sum();
    let qe: f64 = q.iter().map(|&qi| pow(qi, e)).sum();
    let cross: f64 = p.iter().zip(q.iter()).map(|(&pi, &qi)| pow(pi, al) * pow(qi, be - 1.0)).sum();
    // q^(α+β-2) and p^α q^(β-2)
    let m: Vec<f64> = q.iter().map(|&qi| pow(qi, e - 1.0)).collect();
    let n: Vec<f64> = p.iter().zip(q.iter()).map(|(&pi, &qi)| pow(pi, al) * pow(qi, be - 2.0)).collect();

    use AlphaBetaCase::*;
    let (a, b, da, db) = match case {
        // A = Σp^e/((β-1)e) + Σq^e/(αe), B = Σp^α q^(β-1)/(α(β-1))
        C1 | C4Bis => (
            pe / ((be - 1.0) * e) + qe / (al * e),
            cross / (al * (be - 1.0)),
            Partial::signed(1.0 / al, &m),
            Partial::signed(1.0 / al, &n),
        ),
        // A = Σq^e/(αe) + Σp^α q^(β-1)/(α(1-β)), B = Σp^e/((1-β)e)
        C2 | C3Bis => (
            qe / (al * e) + cross / (al * (1.0 - be)),
            pe / ((1.0 - be) * e),
            Partial::signed(1.0 / al, &m).with_signed(-1.0 / al, &n),
            Partial::zero(q.len()),
        ),
        // A = Σp^e/((β-1)e) - Σp^α q^(β-1)/(α(β-1)), B = Σq^e/(α(1-α-β))
        C4 | C1Bis => (
            pe / ((be - 1.0) * e) - cross / (al * (be - 1.0)),
            qe / (al * (1.0 - al - be)),
            Partial::signed(-1.0 / al, &n),
            Partial::signed(-1.0 / al, &m),
        ),
    };
    Ok(BaseSplit {
        a,
        b,
        da,
        db,
        case: SplitCase::AlphaBeta(case),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{fd_gradient, random_field, FdSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(v: &[f64]) -> Field {
        Field::from_slice(v).unwrap()
    }

    // Direct evaluation of the displayed formulas, independent of the splits.
    fn alpha_direct(p: &[f64], q: &[f64], al: f64) -> f64 {
        let s: f64 = p.iter().zip(q).map(|(a, b)| a.powf(al) * b.powf(1.0 - al)).sum();
        let sp: f64 = p.iter().sum();
        let sq: f64 = q.iter().sum();
        (s - (al * sp + (1.0 - al) * sq)) / (al * (al - 1.0))
    }

    fn beta_direct(p: &[f64], q: &[f64], be: f64) -> f64 {
        p.iter()
            .zip(q)
            .map(|(&a, &b)| a.powf(be) - be * a * b.powf(be - 1.0) - (1.0 - be) * b.powf(be))
            .sum::<f64>()
            / (be * (be - 1.0))
    }

    fn ab_direct(p: &[f64], q: &[f64], al: f64, be: f64) -> f64 {
        let e = al + be - 1.0;
        p.iter()
            .zip(q)
            .map(|(&a, &b)| a.powf(e) + (be - 1.0) / al * b.powf(e) - e / al * a.powf(al) * b.powf(be - 1.0))
            .sum::<f64>()
            / ((be - 1.0) * e)
    }

    #[test]
    fn alpha_frozen_examples() {
        let s = alpha_split(&f(&[1.0, 1.0, 1.0]), &f(&[1.0, 1.0, 1.0]), &DivergenceParams::alpha(0.5)).unwrap();
        assert!(s.value().abs() < 1e-14);

        let s = alpha_split(&f(&[4.0]), &f(&[1.0]), &DivergenceParams::alpha(0.5)).unwrap();
        assert!((s.a - 10.0).abs() < 1e-13 && (s.b - 8.0).abs() < 1e-13);
        assert_eq!(s.case, SplitCase::AlphaBetween);

        let s = alpha_split(&f(&[1.0]), &f(&[2.0]), &DivergenceParams::alpha(2.0)).unwrap();
        assert!((s.a - 1.25).abs() < 1e-14 && (s.b - 1.0).abs() < 1e-14);
        assert_eq!(s.case, SplitCase::AlphaAbove);

        let s = alpha_split(&f(&[1.0]), &f(&[2.0]), &DivergenceParams::alpha(-1.0)).unwrap();
        assert!((s.a - 2.5).abs() < 1e-14 && (s.b - 2.0).abs() < 1e-14);
        assert_eq!(s.case, SplitCase::AlphaNegative);
    }

    #[test]
    fn beta_frozen_examples() {
        let s = beta_split(&f(&[3.0]), &f(&[1.0]), &DivergenceParams::beta(2.0)).unwrap();
        assert!((s.value() - 2.0).abs() < 1e-14);
        let s = beta_split(&f(&[1.0]), &f(&[4.0]), &DivergenceParams::beta(0.5)).unwrap();
        assert!((s.a - 5.0).abs() < 1e-14 && (s.b - 4.0).abs() < 1e-14);
        let p = f(&[0.3, 2.0]);
        let s = beta_split(&p, &p, &DivergenceParams::beta(-0.7)).unwrap();
        assert!(s.value().abs() < 1e-13);
    }

    #[test]
    fn alphabeta_frozen_examples() {
        let p = f(&[0.4, 1.7, 3.0]);
        let s = alphabeta_split(&p, &p, &DivergenceParams::alpha_beta(0.5, 2.5)).unwrap();
        assert!(s.value().abs() < 1e-13);
        let s = alphabeta_split(&f(&[1.0]), &f(&[2.0]), &DivergenceParams::alpha_beta(2.0, 2.0)).unwrap();
        assert_eq!(s.case, SplitCase::AlphaBeta(AlphaBetaCase::C1));
        assert!((s.value() - 2.0 / 3.0).abs() < 1e-14);
        let s = alphabeta_split(&f(&[1.0]), &f(&[2.0]), &DivergenceParams::alpha_beta(-1.0, 3.0)).unwrap();
        assert_eq!(s.case, SplitCase::AlphaBeta(AlphaBetaCase::C1Bis));
        assert!((s.value() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exclusion_zones_rejected() {
        let p = f(&[1.0]);
        for al in [0.0, 1.0, 5e-7, 1.0 - 5e-7] {
            assert!(alpha_split(&p, &p, &DivergenceParams::alpha(al)).is_err());
        }
        for be in [0.0, 1.0] {
            assert!(beta_split(&p, &p, &DivergenceParams::beta(be)).is_err());
        }
        assert!(alphabeta_split(&p, &p, &DivergenceParams::alpha_beta(0.0, 2.0)).is_err());
        assert!(alphabeta_split(&p, &p, &DivergenceParams::alpha_beta(0.5, 1.0)).is_err());
        assert!(alphabeta_split(&p, &p, &DivergenceParams::alpha_beta(0.5, 0.5)).is_err());
        assert!(matches!(
            alpha_split(&p, &f(&[1.0, 2.0]), &DivergenceParams::alpha(0.5)),
            Err(crate::Error::Shape { .. })
        ));
    }

    fn check_split<F>(params: &[DivergenceParams], split: F, direct: impl Fn(&[f64], &[f64], &DivergenceParams) -> f64)
    where
        F: Fn(&Field, &Field, &DivergenceParams) -> Result<BaseSplit>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dp in params {
            for _ in 0..100 {
                let p = random_field(&mut rng, 8, 0.1, 10.0);
                let q = random_field(&mut rng, 8, 0.1, 10.0);
                let s = split(&p, &q, dp).unwrap();
                assert!(s.a > 0.0 && s.b > 0.0, "{dp:?} {s:?}");
                assert!(s.value() >= -1e-12 * (s.a + s.b));
                let d = direct(&p, &q, dp);
                assert!((s.value() - d).abs() <= 1e-12 * (s.a + s.b).max(1.0), "{dp:?}: {} vs {d}", s.value());

                let spec = FdSpec::default();
                let fa = fd_gradient(|x| split(&p, x, dp).unwrap().a, &q, &spec).unwrap();
                let fb = fd_gradient(|x| split(&p, x, dp).unwrap().b, &q, &spec).unwrap();
                let da = s.da.total();
                let db = s.db.total();
                for (j, (an, fd)) in da.iter().zip(&fa).chain(db.iter().zip(&fb)).enumerate() {
                    // central-difference roundoff is about eps * (A + B) / (h q_j)
                    let scale = an.abs().max(fd.abs()).max(1e-4 * (s.a + s.b) / q[j % q.len()]);
                    assert!((an - fd).abs() <= 1e-5 * scale, "{dp:?}: {an} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn alpha_cases_match_direct_and_fd() {
        let params: Vec<_> = [0.3, 0.5, 0.9, 1.5, 2.5, -0.5, -1.5].iter().map(|&a| DivergenceParams::alpha(a)).collect();
        check_split(&params, alpha_split, |p, q, dp| alpha_direct(p, q, dp.alpha));
    }

    #[test]
    fn beta_cases_match_direct_and_fd() {
        let params: Vec<_> = [0.3, 0.7, 1.5, 2.0, 3.0, -0.5, -1.2].iter().map(|&b| DivergenceParams::beta(b)).collect();
        check_split(&params, beta_split, |p, q, dp| beta_direct(p, q, dp.beta));
    }

    #[test]
    fn alphabeta_cases_match_direct_and_fd() {
        let params = [
            (2.0, 2.0),  // C1
            (0.8, 0.5),  // C2
            (0.2, 0.5),  // C4
            (-1.0, 3.0), // C1bis
            (-2.0, 1.5), // C3bis
            (-1.0, 0.5), // C4bis
        ]
        .map(|(a, b)| DivergenceParams::alpha_beta(a, b));
        check_split(&params, alphabeta_split, |p, q, dp| ab_direct(p, q, dp.alpha, dp.beta));
    }
}
