//! Divergences between weighted means, the F and G divergences, the dual
//! Kullback-Leibler divergence and the (r, s) generalization of the mean
//! divergences.

use serde::{Deserialize, Serialize};

use super::{alpha_split, check_excluded, check_unit_interval, BaseSplit, DivergenceParams, Partial, SplitCase, EXCLUSION_RADIUS};
use crate::deformed_log::ln_ratio;
use crate::error::Result;
use crate::field::{same_len, Field};

/// Which pair of means a mean divergence compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    /// geometric minus harmonic
    GeometricHarmonic,
    /// arithmetic minus geometric
    ArithmeticGeometric,
    /// arithmetic minus harmonic
    ArithmeticHarmonic,
}

/// Per-component weighted means of `(p_i, q_i)` with weight `α` on `p`, their
/// derivatives in `q_i`, and the ratios used by the F and G divergences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFields {
    /// `α p + (1-α) q`
    pub ma: Vec<f64>,
    /// `p^α q^(1-α)`
    pub mg: Vec<f64>,
    /// `p q / ((1-α) p + α q)`
    pub mh: Vec<f64>,
    pub dma: Vec<f64>,
    pub dmg: Vec<f64>,
    pub dmh: Vec<f64>,
    /// `p / (α p + (1-α) q)`
    pub z: Vec<f64>,
    /// `α p + (1-α) q`
    pub t: Vec<f64>,
}

pub fn mean_fields(p: &Field, q: &Field, alpha: f64) -> Result<MeanFields> {
    same_len(p, q)?;
    check_unit_interval(alpha, true)?;
    let n = p.len();
    let mut out = MeanFields {
        ma: Vec::with_capacity(n),
        mg: Vec::with_capacity(n),
        mh: Vec::with_capacity(n),
        dma: Vec::with_capacity(n),
        dmg: Vec::with_capacity(n),
        dmh: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
    };
    let w = 1.0 - alpha;
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        let arith = alpha * pi + w * qi;
        let harm_den = w * pi + alpha * qi;
        out.ma.push(arith);
        out.mg.push((alpha * pi.ln() + w * qi.ln()).exp());
        out.mh.push(pi * qi / harm_den);
        out.dma.push(w);
        out.dmg.push(w * (alpha * (pi / qi).ln()).exp());
        out.dmh.push(w * pi * pi / (harm_den * harm_den));
        out.z.push(pi / arith);
        out.t.push(arith);
    }
    Ok(out)
}

/// `(Σ (MA - MG), Σ (MA - MH))`, each term computed in a form whose
/// first-order parts cancel exactly.
pub fn mean_gaps(p: &Field, q: &Field, alpha: f64) -> Result<(f64, f64)> {
    same_len(p, q)?;
    check_unit_interval(alpha, true)?;
    let w = 1.0 - alpha;
    let (mut ag, mut ah) = (0.0, 0.0);
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        let l = ln_ratio(qi, pi);
        ag += pi * (w * l.exp_m1() - (w * l).exp_m1());
        let d = pi - qi;
        ah += alpha * w * d * d / (w * pi + alpha * qi);
    }
    Ok((ag, ah))
}

/// `A - B` with `A` the sum of the larger mean and `B` the sum of the smaller.
///
/// The arithmetic-geometric divergence equals `α(1-α)` times the α
/// divergence and is obtained from [`alpha_split`] whenever `α` is away
/// from the endpoints.
pub fn mean_split(kind: MeanKind, p: &Field, q: &Field, alpha: f64) -> Result<BaseSplit> {
    if kind == MeanKind::ArithmeticGeometric && alpha > EXCLUSION_RADIUS && alpha < 1.0 - EXCLUSION_RADIUS {
        same_len(p, q)?;
        let mut split = alpha_split(p, q, &DivergenceParams::alpha(alpha))?;
        split.scale(alpha * (1.0 - alpha));
        split.case = SplitCase::Mean(kind);
        return Ok(split);
    }
    let m = mean_fields(p, q, alpha)?;
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let (a, b, da, db) = match kind {
        MeanKind::GeometricHarmonic => (sum(&m.mg), sum(&m.mh), &m.dmg, &m.dmh),
        MeanKind::ArithmeticGeometric => (sum(&m.ma), sum(&m.mg), &m.dma, &m.dmg),
        MeanKind::ArithmeticHarmonic => (sum(&m.ma), sum(&m.mh), &m.dma, &m.dmh),
    };
    Ok(BaseSplit {
        a,
        b,
        da: Partial::signed(1.0, da),
        db: Partial::signed(1.0, db),
        case: SplitCase::Mean(kind),
    })
}

/// `F(p||q) = Σ p ln(p / (αp + (1-α)q)) + (1-α)(q - p)`.
pub fn f_divergence(p: &Field, q: &Field, alpha: f64) -> Result<(f64, MeanFields)> {
    check_unit_interval(alpha, false)?;
    let m = mean_fields(p, q, alpha)?;
    let w = 1.0 - alpha;
    let value = p
        .iter()
        .zip(q.iter())
        .map(|(&pi, &qi)| pi * ln_ratio(pi, alpha * pi + w * qi) + w * (qi - pi))
        .sum();
    Ok((value, m))
}

/// `G(p||q) = Σ T ln(T / p) + (1-α)(p - q)` with `T = αp + (1-α)q`.
pub fn g_divergence(p: &Field, q: &Field, alpha: f64) -> Result<(f64, MeanFields)> {
    check_unit_interval(alpha, false)?;
    let m = mean_fields(p, q, alpha)?;
    let w = 1.0 - alpha;
    let value = p
        .iter()
        .zip(q.iter())
        .zip(&m.t)
        .map(|((&pi, &qi), &ti)| ti * ln_ratio(ti, pi) + w * (pi - qi))
        .sum();
    Ok((value, m))
}

/// Dual Kullback-Leibler divergence `KL(q||p) = Σ q ln(q/p) + p - q`.
pub fn dual_kl(p: &Field, q: &Field) -> Result<f64> {
    same_len(p, q)?;
    Ok(p.iter().zip(q.iter()).map(|(&pi, &qi)| qi * ln_ratio(qi, pi) + (pi - qi)).sum())
}

/// `1/(s-1) { [Σ MG^(1-r) MA^r]^((s-1)/(r-1)) - [Σ MA]^((s-1)/(r-1)) }`.
pub fn taneja_rs(p: &Field, q: &Field, alpha: f64, r: f64, s: f64) -> Result<f64> {
    check_excluded("r", r, 1.0)?;
    check_excluded("s", s, 1.0)?;
    let m = mean_fields(p, q, alpha)?;
    let mixed: f64 = m
        .mg
        .iter()
        .zip(&m.ma)
        .map(|(&g, &a)| ((1.0 - r) * g.ln() + r * a.ln()).exp())
        .sum();
    let arith: f64 = m.ma.iter().sum();
    let e = (s - 1.0) / (r - 1.0);
    Ok((mixed.powf(e) - arith.powf(e)) / (s - 1.0))
}
