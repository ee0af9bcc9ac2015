//! Base divergences written as a difference of two positive terms.
//!
//! Every split carries the partial derivatives of its two terms with respect
//! to `q`, each stored as a `plus - minus` pair of non-negative vectors. The
//! sign-separated form is what the multiplicative algorithms need: the
//! positive and negative contributions of the opposite gradient are read off
//! it directly, case by case, without re-deriving signs downstream.

mod means;
mod power;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

pub use means::{
    dual_kl, f_divergence, g_divergence, mean_fields, mean_gaps, mean_split, taneja_rs, MeanFields, MeanKind,
};
pub use power::{alpha_split, alphabeta_split, beta_split};

/// Parameters are rejected when this close to a singular value of the
/// family's prefactor (0 and 1 for α and β, 1 for α + β).
pub const EXCLUSION_RADIUS: f64 = 1e-6;

/// Family parameters. Each family reads only the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DivergenceParams {
    pub alpha: f64,
    pub beta: f64,
}

impl DivergenceParams {
    pub fn alpha(alpha: f64) -> Self {
        Self { alpha, beta: 0.0 }
    }

    pub fn beta(beta: f64) -> Self {
        Self { alpha: 0.0, beta }
    }

    pub fn alpha_beta(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }
}

pub(crate) fn check_excluded(name: &str, value: f64, singular: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(param_err(format!("{name} must be finite, got {value}")));
    }
    if (value - singular).abs() < EXCLUSION_RADIUS {
        return Err(param_err(format!(
            "{name} = {value} lies within {EXCLUSION_RADIUS:e} of the excluded value {singular}"
        )));
    }
    Ok(())
}

pub(crate) fn check_unit_interval(alpha: f64, closed_top: bool) -> Result<()> {
    let ok = alpha >= 0.0 && if closed_top { alpha <= 1.0 } else { alpha < 1.0 };
    if !ok {
        let range = if closed_top { "[0, 1]" } else { "[0, 1)" };
        return Err(param_err(format!("alpha = {alpha} must lie in {range}")));
    }
    Ok(())
}

/// A partial derivative written as `plus - minus`, both non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partial {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl Partial {
    pub fn zero(n: usize) -> Self {
        Self {
            plus: vec![0.0; n],
            minus: vec![0.0; n],
        }
    }

    /// `coef * v` for a non-negative vector `v`, routed by the sign of `coef`.
    pub fn signed(coef: f64, v: &[f64]) -> Self {
        let mut out = Self::zero(v.len());
        out.add_signed(coef, v);
        out
    }

    pub fn add_signed(&mut self, coef: f64, v: &[f64]) {
        let target = if coef >= 0.0 {
            &mut self.plus
        } else {
            &mut self.minus
        };
        let mag = coef.abs();
        for (t, vi) in target.iter_mut().zip(v) {
            *t += mag * vi;
        }
    }

    pub fn with_signed(mut self, coef: f64, v: &[f64]) -> Self {
        self.add_signed(coef, v);
        self
    }

    pub fn scale(&mut self, factor: f64) {
        debug_assert!(factor >= 0.0);
        self.plus.iter_mut().for_each(|v| *v *= factor);
        self.minus.iter_mut().for_each(|v| *v *= factor);
    }

    /// The derivative itself, `plus - minus`.
    pub fn total(&self) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(a, b)| a - b).collect()
    }
}

/// Which printed sign case produced a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCase {
    /// `0 < α < 1`
    AlphaBetween,
    /// `α > 1`
    AlphaAbove,
    /// `α < 0`
    AlphaNegative,
    BetaBetween,
    BetaAbove,
    BetaNegative,
    AlphaBeta(AlphaBetaCase),
    Mean(MeanKind),
}

/// Sign cases of the αβ divergence, keyed by the signs of `α`, `β - 1` and
/// `α + β - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaBetaCase {
    /// α > 0, β > 1
    C1,
    /// α > 0, β < 1, α + β > 1
    C2,
    /// α > 0, β < 1, α + β < 1
    C4,
    /// α < 0, β > 1, α + β > 1
    C1Bis,
    /// α < 0, β > 1, α + β < 1
    C3Bis,
    /// α < 0, β < 1
    C4Bis,
}

impl AlphaBetaCase {
    /// Classifies a sign pattern. Two of the eight patterns cannot occur for
    /// real parameters and are reported as infeasible.
    pub fn from_signs(alpha_pos: bool, beta_above_one: bool, sum_above_one: bool) -> Result<Self> {
        use AlphaBetaCase::*;
        match (alpha_pos, beta_above_one, sum_above_one) {
            (true, true, true) => Ok(C1),
            (true, false, true) => Ok(C2),
            (true, true, false) => Err(crate::Error::InfeasibleCase(
                "alpha > 0 and beta > 1 force alpha + beta > 1".into(),
            )),
            (true, false, false) => Ok(C4),
            (false, true, true) => Ok(C1Bis),
            (false, false, true) => Err(crate::Error::InfeasibleCase(
                "alpha < 0 and beta < 1 force alpha + beta < 1".into(),
            )),
            (false, true, false) => Ok(C3Bis),
            (false, false, false) => Ok(C4Bis),
        }
    }

    pub fn classify(alpha: f64, beta: f64) -> Result<Self> {
        Self::from_signs(alpha > 0.0, beta > 1.0, alpha + beta > 1.0)
    }
}

/// A divergence `D = A - B` with `A, B > 0` and their derivatives in `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSplit {
    pub a: f64,
    pub b: f64,
    pub da: Partial,
    pub db: Partial,
    pub case: SplitCase,
}

impl BaseSplit {
    pub fn value(&self) -> f64 {
        self.a - self.b
    }

    /// Gradient of `A - B` in `q`.
    pub fn gradient(&self) -> Vec<f64> {
        let da = self.da.total();
        let db = self.db.total();
        da.iter().zip(&db).map(|(x, y)| x - y).collect()
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.a *= factor;
        self.b *= factor;
        self.da.scale(factor);
        self.db.scale(factor);
    }
}
