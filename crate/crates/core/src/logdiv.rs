//! Divergences transformed by the deformed logarithm and the `U - V`
//! decompositions of their opposite gradients.
//!
//! A split `A - B` becomes `log_d(A) - log_d(B)`; a product split
//! `T [A - X Y]` becomes `T [log_d(A) - log_d(X Y)]` with `X Y` kept as one
//! block. The F, G and dual KL divergences already contain a natural
//! logarithm; their deformed versions substitute `log_d` for it, and their
//! plain and natural forms coincide.

use serde::{Deserialize, Serialize};

use crate::deformed_log::{ln_ratio, LogParams};
use crate::divergences::{
    alpha_split, alphabeta_split, beta_split, check_excluded, check_unit_interval, mean_fields, mean_gaps, mean_split, BaseSplit,
    DivergenceParams, MeanKind,
};
use crate::error::{param_err, Result};
use crate::field::{same_len, Field};
use crate::invariance::{invariant_split, nominal_factor, normalized_fields, NominalFamily, ProductSplit};

/// Transform applied to the terms of a divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// the divergence itself
    Plain,
    Log(LogParams),
}

impl Transform {
    fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Plain => x,
            Transform::Log(lp) => lp.log_unchecked(x),
        }
    }

    /// `apply(base + gap) - apply(base)`
    fn apply_gap(&self, base: f64, gap: f64) -> f64 {
        match self {
            Transform::Plain => gap,
            Transform::Log(lp) => lp.log_gap_unchecked(base, gap),
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match self {
            Transform::Plain => 1.0,
            Transform::Log(lp) => lp.dlog_unchecked(x),
        }
    }

    /// Deformed parameters, or `None` for the plain and natural forms.
    pub fn deformed(&self) -> Option<&LogParams> {
        match self {
            Transform::Log(lp) if !lp.is_natural() => Some(lp),
            _ => None,
        }
    }
}

/// `-grad = U - V` with `U, V >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientDecomposition {
    pub grad: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `U` and `V` are strictly positive by construction. False for the
    /// natural dual KL and natural G forms, whose parts may vanish.
    pub strict: bool,
}

impl GradientDecomposition {
    fn from_parts(grad: Vec<f64>, u: Vec<f64>, v: Vec<f64>, strict: bool) -> Self {
        Self { grad, u, v, strict }
    }

    /// Opposite gradient split by the sign of each of a few terms.
    fn from_terms(grad: Vec<f64>, terms: &[Vec<f64>], strict: bool) -> Self {
        let n = grad.len();
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        for term in terms {
            for j in 0..n {
                if term[j] >= 0.0 {
                    u[j] += term[j];
                } else {
                    v[j] -= term[j];
                }
            }
        }
        Self { grad, u, v, strict }
    }

    /// `max_j |U_j - V_j + grad_j| / (U_j + V_j)`, with a tiny absolute floor.
    pub fn consistency_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.grad.len() {
            let scale = (self.u[j] + self.v[j]).max(f64::MIN_POSITIVE);
            worst = worst.max((self.u[j] - self.v[j] + self.grad[j]).abs() / scale);
        }
        worst
    }

    pub fn all_positive(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x > 0.0)
    }

    /// `U / V`, as used by the preconditioned and multiplicative updates.
    pub fn ratio(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(u, v)| u / v).collect()
    }
}

/// Splits that can be transformed term-wise.
pub trait LdSplit {
    /// The split value with both terms passed through `log_d`.
    fn ld_value(&self, lp: &LogParams) -> f64;
    fn decompose(&self, transform: &Transform) -> GradientDecomposition;
}

impl LdSplit for BaseSplit {
    fn ld_value(&self, lp: &LogParams) -> f64 {
        lp.log_unchecked(self.a) - lp.log_unchecked(self.b)
    }

    fn decompose(&self, transform: &Transform) -> GradientDecomposition {
        let za = transform.slope(self.a);
        let zb = transform.slope(self.b);
        let (da, db) = (&self.da, &self.db);
        let n = da.plus.len();
        let mut grad = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            grad.push(za * (da.plus[j] - da.minus[j]) - zb * (db.plus[j] - db.minus[j]));
            u.push(za * da.minus[j] + zb * db.plus[j]);
            v.push(za * da.plus[j] + zb * db.minus[j]);
        }
        GradientDecomposition::from_parts(grad, u, v, true)
    }
}

impl LdSplit for ProductSplit {
    fn ld_value(&self, lp: &LogParams) -> f64 {
        self.t * lp.log_gap_unchecked(self.x * self.y, self.gap)
    }

    fn decompose(&self, transform: &Transform) -> GradientDecomposition {
        let w = self.t * transform.slope(self.x * self.y);
        let from_x: Vec<f64> = self.dx.iter().map(|d| w * self.y * d).collect();
        let from_y: Vec<f64> = self.dy.iter().map(|d| w * self.x * d).collect();
        let grad = from_x.iter().zip(&from_y).map(|(a, b)| -(a + b)).collect();
        GradientDecomposition::from_terms(grad, &[from_x, from_y], true)
    }
}

/// `log_d(A) - log_d(B)` or `T [log_d(A) - log_d(X Y)]`.
pub fn ld_value<S: LdSplit>(split: &S, lp: &LogParams) -> f64 {
    split.ld_value(lp)
}

/// Gradient of `T [ln A - ln X - ln Y]` for the invariant α, β and αβ
/// divergences, from `(1/A) dA - (1/X) dX - (1/Y) dY`.
pub fn natural_ld2_gradient(
    family: NominalFamily,
    p: &Field,
    q: &Field,
    dp: &DivergenceParams,
) -> Result<GradientDecomposition> {
    let s = invariant_split(family, p, q, dp)?;
    // A does not depend on q
    let from_x: Vec<f64> = s.dx.iter().map(|d| s.t * d / s.x).collect();
    let from_y: Vec<f64> = s.dy.iter().map(|d| s.t * d / s.y).collect();
    let grad = from_x.iter().zip(&from_y).map(|(a, b)| -(a + b)).collect();
    Ok(GradientDecomposition::from_terms(grad, &[from_x, from_y], true))
}

/// Natural dual KL divergence `Σ q ln(q/p) + p - q`. The opposite gradient
/// `ln p_j - ln q_j` has no strictly positive split; `U` collects the
/// positive parts of `ln p_j` and `-ln q_j`, `V` the negative parts.
pub fn dual_kl_natural_decomposition(p: &Field, q: &Field) -> Result<GradientDecomposition> {
    same_len(p, q)?;
    let lp_: Vec<f64> = p.iter().map(|x| x.ln()).collect();
    let lq: Vec<f64> = q.iter().map(|x| -x.ln()).collect();
    let grad = lp_.iter().zip(&lq).map(|(a, b)| -(a + b)).collect();
    Ok(GradientDecomposition::from_terms(grad, &[lp_, lq], false))
}

/// `w(r) = log_d(r) + r dlog_d(r) = (a r^(a-1) - b r^(b-1)) / (a - b)` as a
/// pair of non-negative parts `(w+, w-)`.
fn w_parts(lp: &LogParams, r: f64) -> (f64, f64) {
    let (a, b) = (lp.a(), lp.b());
    let ta = a * ((a - 1.0) * r.ln()).exp();
    let tb = b * ((b - 1.0) * r.ln()).exp();
    if a > b {
        (ta / (a - b), tb / (a - b))
    } else {
        (tb / (b - a), ta / (b - a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Alpha,
    Beta,
    AlphaBeta,
    GeometricHarmonic,
    ArithmeticGeometric,
    ArithmeticHarmonic,
    F,
    G,
    DualKl,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Alpha,
        Family::Beta,
        Family::AlphaBeta,
        Family::GeometricHarmonic,
        Family::ArithmeticGeometric,
        Family::ArithmeticHarmonic,
        Family::F,
        Family::G,
        Family::DualKl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Alpha => "alpha",
            Family::Beta => "beta",
            Family::AlphaBeta => "alphabeta",
            Family::GeometricHarmonic => "gh",
            Family::ArithmeticGeometric => "ag",
            Family::ArithmeticHarmonic => "ah",
            Family::F => "f",
            Family::G => "g",
            Family::DualKl => "dual_kl",
        }
    }

    fn nominal(&self) -> Option<NominalFamily> {
        match self {
            Family::Alpha => Some(NominalFamily::Alpha),
            Family::Beta => Some(NominalFamily::Beta),
            Family::AlphaBeta => Some(NominalFamily::AlphaBeta),
            Family::DualKl => Some(NominalFamily::DualKl),
            _ => None,
        }
    }

    fn mean_kind(&self) -> Option<MeanKind> {
        match self {
            Family::GeometricHarmonic => Some(MeanKind::GeometricHarmonic),
            Family::ArithmeticGeometric => Some(MeanKind::ArithmeticGeometric),
            Family::ArithmeticHarmonic => Some(MeanKind::ArithmeticHarmonic),
            _ => None,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .or(match lower.as_str() {
                "alpha_beta" | "ab" => Some(Family::AlphaBeta),
                "kl_dual" | "dualkl" => Some(Family::DualKl),
                _ => None,
            })
            .ok_or_else(|| param_err(format!("unknown family '{s}'")))
    }
}

/// `Invariant` resolves to the nominal factor for α, β and αβ, and to `K*`
/// for the other families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Base,
    Invariant,
    Nominal,
    Star,
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(Variant::Base),
            "invariant" => Ok(Variant::Invariant),
            "nominal" => Ok(Variant::Nominal),
            "star" => Ok(Variant::Star),
            _ => Err(param_err(format!("unknown variant '{s}'"))),
        }
    }
}

/// Value, decomposition and case of an objective at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Size of the terms the value is assembled from. Rounding error in
    /// `value` is a few ulps of this, not of `value` itself.
    pub scale: f64,
    pub decomposition: GradientDecomposition,
    pub case_tag: String,
}

/// A fully specified divergence `q -> L(p || q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    family: Family,
    variant: Variant,
    params: DivergenceParams,
    transform: Transform,
}

impl Objective {
    /// Validates the combination. `Invariant` is resolved here.
    pub fn new(family: Family, variant: Variant, params: DivergenceParams, transform: Transform) -> Result<Self> {
        use Family::*;
        let variant = match (family, variant) {
            (Alpha | Beta | AlphaBeta, Variant::Invariant) => Variant::Nominal,
            (_, Variant::Invariant) => Variant::Star,
            (Alpha | Beta | AlphaBeta, Variant::Star) => {
                return Err(param_err(format!(
                    "the {} family is made invariant with its nominal factor; use variant nominal",
                    family.name()
                )))
            }
            (GeometricHarmonic | ArithmeticGeometric | ArithmeticHarmonic | F | G, Variant::Nominal) => {
                return Err(param_err(format!(
                    "the {} family has no closed-form nominal factor; use variant star",
                    family.name()
                )))
            }
            (DualKl, Variant::Nominal) if transform.deformed().is_some() => {
                return Err(param_err("the nominal dual KL form is available with the natural logarithm only"))
            }
            (_, v) => v,
        };
        let (al, be) = (params.alpha, params.beta);
        match family {
            Alpha => {
                check_excluded("alpha", al, 0.0)?;
                check_excluded("alpha", al, 1.0)?;
            }
            Beta => {
                check_excluded("beta", be, 0.0)?;
                check_excluded("beta", be, 1.0)?;
            }
            AlphaBeta => {
                check_excluded("alpha", al, 0.0)?;
                check_excluded("beta", be, 1.0)?;
                check_excluded("alpha + beta", al + be, 1.0)?;
            }
            GeometricHarmonic | ArithmeticGeometric | ArithmeticHarmonic => {
                // the mean divergences vanish identically at both ends
                check_unit_interval(al, true)?;
                check_excluded("alpha", al, 0.0)?;
                check_excluded("alpha", al, 1.0)?;
            }
            F | G => check_unit_interval(al, false)?,
            DualKl => {}
        }
        Ok(Self {
            family,
            variant,
            params,
            transform,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The resolved variant, never `Invariant`.
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn params(&self) -> DivergenceParams {
        self.params
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn is_invariant(&self) -> bool {
        self.variant != Variant::Base
    }

    /// False when the decomposition has no strictly positive split.
    pub fn is_strict(&self) -> bool {
        let deformed = self.transform.deformed().is_some();
        match self.family {
            Family::DualKl => deformed || self.variant == Variant::Star,
            Family::G => deformed || self.variant == Variant::Star,
            _ => true,
        }
    }

    pub fn value(&self, p: &Field, q: &Field) -> Result<f64> {
        Ok(self.evaluate(p, q)?.value)
    }

    pub fn decompose(&self, p: &Field, q: &Field) -> Result<GradientDecomposition> {
        Ok(self.evaluate(p, q)?.decomposition)
    }

    pub fn evaluate(&self, p: &Field, q: &Field) -> Result<Evaluation> {
        same_len(p, q)?;
        let dp = &self.params;
        let tr = &self.transform;
        if let Some(kind) = self.family.mean_kind() {
            return match self.variant {
                Variant::Base => {
                    let split = mean_split(kind, p, q, dp.alpha)?;
                    Ok(self.evaluate_split(&split))
                }
                _ => self.mean_star(kind, p, q),
            };
        }
        match (self.family, self.variant) {
            (Family::Alpha | Family::Beta | Family::AlphaBeta, Variant::Base) => {
                let split = match self.family {
                    Family::Alpha => alpha_split(p, q, dp)?,
                    Family::Beta => beta_split(p, q, dp)?,
                    _ => alphabeta_split(p, q, dp)?,
                };
                Ok(self.evaluate_split(&split))
            }
            (Family::Alpha | Family::Beta | Family::AlphaBeta, _) => {
                let nominal = self.family.nominal().expect("power families have nominal factors");
                let split = invariant_split(nominal, p, q, dp)?;
                let xy = split.x * split.y;
                let (value, scale) = match tr {
                    Transform::Plain => (split.value(), split.t.abs() * (split.a + xy)),
                    Transform::Log(lp) => (
                        split.ld_value(lp),
                        split.t.abs() * (lp.log_unchecked(split.a).abs() + lp.log_unchecked(xy).abs() + tr.slope(xy) * xy),
                    ),
                };
                Ok(Evaluation {
                    value,
                    scale,
                    decomposition: split.decompose(tr),
                    case_tag: case_name(&format!("{:?}", split.case), "invariant"),
                })
            }
            (Family::F, Variant::Base) => Ok(self.f_base(p, q)),
            (Family::F, _) => self.f_star(p, q),
            (Family::G, Variant::Base) => Ok(self.g_base(p, q)),
            (Family::G, _) => self.g_star(p, q),
            (Family::DualKl, Variant::Base) => self.dual_kl_base(p, q),
            (Family::DualKl, Variant::Nominal) => self.dual_kl_nominal(p, q),
            (Family::DualKl, _) => self.dual_kl_star(p, q),
            _ => unreachable!("mean families handled above"),
        }
    }

    fn log_tag(&self) -> &'static str {
        match self.transform {
            Transform::Plain => "plain",
            Transform::Log(lp) if lp.is_natural() => "ln",
            Transform::Log(lp) if lp.a() > lp.b() => "logd_a_above_b",
            Transform::Log(_) => "logd_a_below_b",
        }
    }

    fn evaluate_split(&self, split: &BaseSplit) -> Evaluation {
        let tr = &self.transform;
        let (value, scale) = match tr {
            Transform::Plain => (split.value(), split.a + split.b),
            Transform::Log(lp) => (
                split.ld_value(lp),
                tr.apply(split.a).abs() + tr.apply(split.b).abs() + tr.slope(split.a) * split.a + tr.slope(split.b) * split.b,
            ),
        };
        Evaluation {
            value,
            scale,
            decomposition: split.decompose(&self.transform),
            case_tag: case_name(&format!("{:?}", split.case), self.log_tag()),
        }
    }

    fn mean_star(&self, kind: MeanKind, p: &Field, q: &Field) -> Result<Evaluation> {
        let tr = &self.transform;
        let al = self.params.alpha;
        let np = normalized_fields(p, q)?;
        let k = np.star();
        let qb = np.q_bar.as_slice();
        let m = mean_fields(&np.p_bar, &np.q_bar, al)?;
        let n = qb.len();
        let c = (1.0 - al) * k;
        let mg_sum: f64 = m.mg.iter().sum();
        let mh_sum: f64 = m.mh.iter().sum();
        // MG_j / q_j and MH_j^2 / q_j^2 on the normalized fields
        let g_ratio: Vec<f64> = (0..n).map(|j| m.mg[j] / qb[j]).collect();
        let h_ratio: Vec<f64> = (0..n).map(|j| (m.mh[j] / qb[j]).powi(2)).collect();
        let h_avg: f64 = (0..n).map(|j| m.mh[j] * m.mh[j] / qb[j]).sum();
        let z = tr.slope(mg_sum);
        let y = tr.slope(mh_sum);
        let (ag, ah) = mean_gaps(&np.p_bar, &np.q_bar, al)?;
        let (value, grad, u, v) = match kind {
            MeanKind::GeometricHarmonic => (
                np.sp * tr.apply_gap(mh_sum, ah - ag),
                (0..n).map(|j| c * (z * (g_ratio[j] - mg_sum) - y * (h_ratio[j] - h_avg))).collect(),
                (0..n).map(|j| c * (y * h_ratio[j] + z * mg_sum)).collect(),
                (0..n).map(|j| c * (z * g_ratio[j] + y * h_avg)).collect(),
            ),
            MeanKind::ArithmeticGeometric => (
                np.sp * tr.apply_gap(mg_sum, ag),
                (0..n).map(|j| -c * z * (g_ratio[j] - mg_sum)).collect(),
                (0..n).map(|j| c * z * g_ratio[j]).collect(),
                vec![c * z * mg_sum; n],
            ),
            MeanKind::ArithmeticHarmonic => (
                np.sp * tr.apply_gap(mh_sum, ah),
                (0..n).map(|j| -c * y * (h_ratio[j] - h_avg)).collect(),
                (0..n).map(|j| c * y * h_ratio[j]).collect(),
                vec![c * y * h_avg; n],
            ),
        };
        let terms = |x: f64| tr.apply(x).abs() + tr.slope(x) * x;
        Ok(Evaluation {
            value,
            scale: np.sp * (terms(1.0) + terms(mg_sum) + terms(mh_sum)),
            decomposition: GradientDecomposition::from_parts(grad, u, v, true),
            case_tag: format!("{}_star_{}", self.family.name(), self.log_tag()),
        })
    }

    fn f_base(&self, p: &Field, q: &Field) -> Evaluation {
        let w = 1.0 - self.params.alpha;
        let (mut value, mut scale) = (0.0, 0.0);
        let mut grad = Vec::with_capacity(p.len());
        let mut u = Vec::with_capacity(p.len());
        for (&pi, &qi) in p.iter().zip(q.iter()) {
            let mix = self.params.alpha * pi + w * qi;
            let z = pi / mix;
            let (lz, zz) = match self.transform.deformed() {
                Some(lp) => (lp.log_ratio_unchecked(pi, mix), z * z * lp.dlog_unchecked(z)),
                None => (ln_ratio(pi, mix), z),
            };
            value += pi * lz + w * (qi - pi);
            scale += (pi * lz).abs() + w * (qi + pi);
            grad.push(w * (1.0 - zz));
            u.push(w * zz);
        }
        let v = vec![w; p.len()];
        Evaluation {
            value,
            scale,
            decomposition: GradientDecomposition::from_parts(grad, u, v, true),
            case_tag: format!("f_{}", self.log_tag()),
        }
    }

    fn f_star(&self, p: &Field, q: &Field) -> Result<Evaluation> {
        let al = self.params.alpha;
        let np = normalized_fields(p, q)?;
        let c = (1.0 - al) * np.star();
        let (pb, qb) = (np.p_bar.as_slice(), np.q_bar.as_slice());
        let (mut value, mut scale) = (0.0, 0.0);
        let mut zz = Vec::with_capacity(pb.len());
        for (&a, &b) in pb.iter().zip(qb) {
            let mix = al * a + (1.0 - al) * b;
            let z = a / mix;
            let term = match self.transform.deformed() {
                Some(lp) => {
                    zz.push(z * z * lp.dlog_unchecked(z));
                    a * lp.log_ratio_unchecked(a, mix)
                }
                None => {
                    zz.push(z);
                    a * ln_ratio(a, mix)
                }
            } + (mix - a);
            value += term;
            scale += term.abs() + a + b;
        }
        let avg: f64 = qb.iter().zip(&zz).map(|(b, x)| b * x).sum();
        let grad = zz.iter().map(|x| -c * (x - avg)).collect();
        let u = zz.iter().map(|x| c * x).collect();
        let v = vec![c * avg; pb.len()];
        Ok(Evaluation {
            value: np.sp * value,
            scale: np.sp * scale,
            decomposition: GradientDecomposition::from_parts(grad, u, v, true),
            case_tag: format!("f_star_{}", self.log_tag()),
        })
    }

    fn g_base(&self, p: &Field, q: &Field) -> Evaluation {
        let al = self.params.alpha;
        let w = 1.0 - al;
        let n = p.len();
        let (mut value, mut scale) = (0.0, 0.0);
        let mut grad = Vec::with_capacity(n);
        let decomposition = match self.transform.deformed() {
            Some(lp) => {
                let mut u = Vec::with_capacity(n);
                let mut v = Vec::with_capacity(n);
                for (&pi, &qi) in p.iter().zip(q.iter()) {
                    let t = al * pi + w * qi;
                    let r = t / pi;
                    let term = t * lp.log_ratio_unchecked(t, pi);
                    value += term + w * (pi - qi);
                    scale += term.abs() + w * (pi + qi);
                    let (wp, wm) = w_parts(lp, r);
                    grad.push(w * (wp - wm - 1.0));
                    u.push(w * (1.0 + wm));
                    v.push(w * wp);
                }
                GradientDecomposition::from_parts(grad, u, v, true)
            }
            None => {
                let mut ln_p = Vec::with_capacity(n);
                let mut neg_ln_t = Vec::with_capacity(n);
                for (&pi, &qi) in p.iter().zip(q.iter()) {
                    let t = al * pi + w * qi;
                    let term = t * ln_ratio(t, pi);
                    value += term + w * (pi - qi);
                    scale += term.abs() + w * (pi + qi);
                    grad.push(w * (t.ln() - pi.ln()));
                    ln_p.push(w * pi.ln());
                    neg_ln_t.push(-w * t.ln());
                }
                GradientDecomposition::from_terms(grad, &[ln_p, neg_ln_t], false)
            }
        };
        Evaluation {
            value,
            scale,
            decomposition,
            case_tag: format!("g_{}", self.log_tag()),
        }
    }

    fn g_star(&self, p: &Field, q: &Field) -> Result<Evaluation> {
        let al = self.params.alpha;
        let np = normalized_fields(p, q)?;
        let c = (1.0 - al) * np.star();
        let (pb, qb) = (np.p_bar.as_slice(), np.q_bar.as_slice());
        let t: Vec<f64> = pb.iter().zip(qb).map(|(a, b)| al * a + (1.0 - al) * b).collect();
        let (value, scale, decomposition) = self.ratio_star(pb, qb, &t, c);
        Ok(Evaluation {
            value: np.sp * value,
            scale: np.sp * scale,
            decomposition,
            case_tag: format!("g_star_{}", self.log_tag()),
        })
    }

    /// Shared by the G and dual KL `K*` forms: `Σ T log(T / p)` on
    /// normalized fields plus the zero-sum `p - T` that keeps each term second
    /// order, with opposite gradient `c [Σ q w(r) - w(r_j)]`,
    /// `r = T / p`.
    fn ratio_star(&self, pb: &[f64], qb: &[f64], t: &[f64], c: f64) -> (f64, f64, GradientDecomposition) {
        let n = pb.len();
        match self.transform.deformed() {
            Some(lp) => {
                let (mut value, mut scale) = (0.0, 0.0);
                let mut wp = Vec::with_capacity(n);
                let mut wm = Vec::with_capacity(n);
                for j in 0..n {
                    let r = t[j] / pb[j];
                    let term = t[j] * lp.log_ratio_unchecked(t[j], pb[j]) + (pb[j] - t[j]);
                    value += term;
                    scale += term.abs() + t[j] + pb[j];
                    let (a, b) = w_parts(lp, r);
                    wp.push(a);
                    wm.push(b);
                }
                let avg_p: f64 = qb.iter().zip(&wp).map(|(q, x)| q * x).sum();
                let avg_m: f64 = qb.iter().zip(&wm).map(|(q, x)| q * x).sum();
                let grad = (0..n).map(|j| c * ((wp[j] - wm[j]) - (avg_p - avg_m))).collect();
                let u = (0..n).map(|j| c * (avg_p + wm[j])).collect();
                let v = (0..n).map(|j| c * (avg_m + wp[j])).collect();
                (value, scale, GradientDecomposition::from_parts(grad, u, v, true))
            }
            None => {
                let terms: Vec<f64> = (0..n).map(|j| t[j] * ln_ratio(t[j], pb[j]) + (pb[j] - t[j])).collect();
                let value = terms.iter().sum();
                let scale = (0..n).map(|j| terms[j].abs() + t[j] + pb[j]).sum();
                let avg_lp: f64 = qb.iter().zip(pb).map(|(q, x)| q * x.ln()).sum();
                let avg_lt: f64 = qb.iter().zip(t).map(|(q, x)| q * x.ln()).sum();
                let grad = (0..n)
                    .map(|j| c * ((t[j].ln() - pb[j].ln()) - (avg_lt - avg_lp)))
                    .collect();
                let u = (0..n).map(|j| c * (-avg_lp - t[j].ln())).collect();
                let v = (0..n).map(|j| c * (-avg_lt - pb[j].ln())).collect();
                (value, scale, GradientDecomposition::from_parts(grad, u, v, true))
            }
        }
    }

    fn dual_kl_base(&self, p: &Field, q: &Field) -> Result<Evaluation> {
        let tag = format!("dual_kl_{}", self.log_tag());
        let Some(lp) = self.transform.deformed() else {
            return Ok(Evaluation {
                value: crate::divergences::dual_kl(p, q)?,
                scale: p.iter().zip(q.iter()).map(|(pi, qi)| (qi * (qi / pi).ln()).abs() + pi + qi).sum(),
                decomposition: dual_kl_natural_decomposition(p, q)?,
                case_tag: tag,
            });
        };
        let n = p.len();
        let (mut value, mut scale) = (0.0, 0.0);
        let mut grad = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for (&pi, &qi) in p.iter().zip(q.iter()) {
            let r = qi / pi;
            let term = qi * lp.log_ratio_unchecked(qi, pi);
            value += term + (pi - qi);
            scale += term.abs() + pi + qi;
            let (wp, wm) = w_parts(lp, r);
            grad.push(wp - wm - 1.0);
            u.push(1.0 + wm);
            v.push(wp);
        }
        Ok(Evaluation {
            value,
            scale,
            decomposition: GradientDecomposition::from_parts(grad, u, v, true),
            case_tag: tag,
        })
    }

    fn dual_kl_star(&self, p: &Field, q: &Field) -> Result<Evaluation> {
        let np = normalized_fields(p, q)?;
        let (value, scale, decomposition) =
            self.ratio_star(np.p_bar.as_slice(), np.q_bar.as_slice(), np.q_bar.as_slice(), np.star());
        Ok(Evaluation {
            value: np.sp * value,
            scale: np.sp * scale,
            decomposition,
            case_tag: format!("dual_kl_star_{}", self.log_tag()),
        })
    }

    /// `Σp - K0 Σq`; the opposite gradient `K0 [ln p_j - ln q_j - m]`,
    /// `m = Σ q ln(p/q) / Σ q`, is split by the signs of its three terms.
    fn dual_kl_nominal(&self, p: &Field, q: &Field) -> Result<Evaluation> {
        let k0 = nominal_factor(NominalFamily::DualKl, p, q, &self.params)?.value;
        let sq = q.total();
        let mean: f64 = p.iter().zip(q.iter()).map(|(pi, qi)| qi * (pi / qi).ln()).sum::<f64>() / sq;
        let ln_p: Vec<f64> = p.iter().map(|x| k0 * x.ln()).collect();
        let neg_ln_q: Vec<f64> = q.iter().map(|x| -k0 * x.ln()).collect();
        let shift = vec![-k0 * mean; p.len()];
        let grad = p
            .iter()
            .zip(q.iter())
            .map(|(pi, qi)| -k0 * ((pi / qi).ln() - mean))
            .collect();
        Ok(Evaluation {
            // the base dual KL at (p, K0 q), term by term
            value: p
                .iter()
                .zip(q.iter())
                .map(|(&pi, &qi)| {
                    let m = k0 * qi;
                    m * ln_ratio(m, pi) + (pi - m)
                })
                .sum(),
            scale: p.total() + k0 * sq,
            decomposition: GradientDecomposition::from_terms(grad, &[ln_p, neg_ln_q, shift], false),
            case_tag: "dual_kl_nominal_ln".into(),
        })
    }
}

fn case_name(debug: &str, suffix: &str) -> String {
    let mut out = String::new();
    for (i, ch) in debug.chars().filter(|c| c.is_alphanumeric()).enumerate() {
        if ch.is_uppercase() && i > 0 {
            out.push('_');
        }
        out.push(ch.to_ascii_lowercase());
    }
    format!("{out}_{suffix}")
}

/// Decomposition of an objective in deformed-log (or natural-log) form.
pub fn ld_gradient(
    family: Family,
    variant: Variant,
    p: &Field,
    q: &Field,
    dp: &DivergenceParams,
    lp: &LogParams,
) -> Result<GradientDecomposition> {
    Objective::new(family, variant, *dp, Transform::Log(*lp))?.decompose(p, q)
}
