//! Two-parameter deformed logarithm
//!
//! `log_d(x) = (x^(a-1) - x^(b-1)) / (a - b)`, admissible when
//! `0 < a <= 1 <= b` or `0 < b <= 1 <= a`. The natural logarithm is the
//! `a, b -> 1` limit and is carried as an explicit variant instead of a
//! numeric epsilon.
//!
//! Named families map onto `(a, b)`:
//!
//! | family      | a         | b         |
//! |-------------|-----------|-----------|
//! | Tsallis     | t         | 1         |
//! | Kaniadakis  | 1 + K     | 1 - K     |
//! | Abe         | z         | 1 / z     |
//! | gamma       | 2γ + 1    | 1 - γ     |
//! | KLS         | 1 + r + K | 1 + r - K |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted `|a - b|` for the deformed variant.
pub const MIN_PARAM_GAP: f64 = 1e-12;

/// Parameters of the deformed logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogParams {
    a: f64,
    b: f64,
    natural: bool,
}

impl LogParams {
    /// Deformed variant. Fails unless `(a, b)` sits in the admissible region.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let bad = |reason| Err(Error::InadmissibleParams { a, b, reason });
        if !(a.is_finite() && b.is_finite()) {
            return bad("parameters must be finite");
        }
        if (a - b).abs() < MIN_PARAM_GAP {
            return bad("a and b coincide; use the natural variant for the a,b -> 1 limit");
        }
        if a <= 0.0 || b <= 0.0 {
            return bad("a and b must be strictly positive");
        }
        let lower_upper = a <= 1.0 && 1.0 <= b;
        let upper_lower = b <= 1.0 && 1.0 <= a;
        if !(lower_upper || upper_lower) {
            return bad("1 must lie between a and b");
        }
        Ok(Self { a, b, natural: false })
    }

    /// The exact natural logarithm.
    pub fn natural() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            natural: true,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_natural(&self) -> bool {
        self.natural
    }

    /// `((a-1)/(a-b), (b-1)/(a-b))`. The first is `>= 0`, the second `<= 0`;
    /// both are zero for the natural variant.
    pub fn weights(&self) -> (f64, f64) {
        if self.natural {
            return (0.0, 0.0);
        }
        let gap = self.a - self.b;
        ((self.a - 1.0) / gap, (self.b - 1.0) / gap)
    }

    /// Deformed logarithm of `x`.
    pub fn log(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(self.log_unchecked(x))
    }

    /// Derivative of [`LogParams::log`] at `s`.
    pub fn dlog(&self, s: f64) -> Result<f64> {
        check_positive(s)?;
        Ok(self.dlog_unchecked(s))
    }

    // x^(a-1) - x^(b-1) = x^(b-1) * expm1((a-b) ln x), which keeps full
    // relative precision when a and b are close.
    pub(crate) fn log_unchecked(&self, x: f64) -> f64 {
        self.log_of_ln(x.ln())
    }

    /// `log_d(num / den)` without rounding the quotient first.
    pub(crate) fn log_ratio_unchecked(&self, num: f64, den: f64) -> f64 {
        self.log_of_ln(ln_ratio(num, den))
    }

    /// `log_d(base + gap) - log_d(base)` without cancellation.
    pub(crate) fn log_gap_unchecked(&self, base: f64, gap: f64) -> f64 {
        let l = (gap / base).ln_1p();
        if self.natural {
            return l;
        }
        let (ea, eb) = (self.a - 1.0, self.b - 1.0);
        (base.powf(ea) * (ea * l).exp_m1() - base.powf(eb) * (eb * l).exp_m1()) / (self.a - self.b)
    }

    fn log_of_ln(&self, ln_x: f64) -> f64 {
        if self.natural {
            return ln_x;
        }
        let gap = self.a - self.b;
        ((self.b - 1.0) * ln_x).exp() * (gap * ln_x).exp_m1() / gap
    }

    pub(crate) fn dlog_unchecked(&self, s: f64) -> f64 {
        if self.natural {
            return 1.0 / s;
        }
        let (wa, wb) = self.weights();
        let ln_s = s.ln();
        wa * ((self.a - 2.0) * ln_s).exp() - wb * ((self.b - 2.0) * ln_s).exp()
    }
}

/// `ln(num / den)`, through `ln_1p` of the relative gap when the ratio is
/// near one so that the result keeps relative precision.
pub(crate) fn ln_ratio(num: f64, den: f64) -> f64 {
    let gap = (num - den) / den;
    if gap.abs() < 0.5 {
        gap.ln_1p()
    } else {
        (num / den).ln()
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { index: 0, value: x })
    }
}

/// Named entropy families and their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LogFamily {
    Shannon,
    Tsallis { t: f64 },
    Kaniadakis { k: f64 },
    Abe { z: f64 },
    Gamma { gamma: f64 },
    Kls { r: f64, k: f64 },
}

/// Maps a named family onto `(a, b)`.
pub fn make_params(family: LogFamily) -> Result<LogParams> {
    match family {
        LogFamily::Shannon => Ok(LogParams::natural()),
        LogFamily::Tsallis { t } => LogParams::new(t, 1.0),
        LogFamily::Kaniadakis { k } => LogParams::new(1.0 + k, 1.0 - k),
        LogFamily::Abe { z } => {
            if z == 0.0 {
                return Err(Error::InadmissibleParams {
                    a: z,
                    b: f64::INFINITY,
                    reason: "Abe parameter must be non-zero",
                });
            }
            LogParams::new(z, 1.0 / z)
        }
        LogFamily::Gamma { gamma } => LogParams::new(2.0 * gamma + 1.0, 1.0 - gamma),
        LogFamily::Kls { r, k } => LogParams::new(1.0 + r + k, 1.0 + r - k),
    }
}

impl TryFrom<LogFamily> for LogParams {
    type Error = Error;

    fn try_from(family: LogFamily) -> Result<Self> {
        make_params(family)
    }
}

/// Free-function form of [`LogParams::log`].
pub fn log_d(x: f64, lp: &LogParams) -> Result<f64> {
    lp.log(x)
}

/// Free-function form of [`LogParams::dlog`].
pub fn dlog_d(s: f64, lp: &LogParams) -> Result<f64> {
    lp.dlog(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: f64, b: f64) -> LogParams {
        LogParams::new(a, b).unwrap()
    }

    fn grid() -> Vec<f64> {
        (1..=100).map(|i| 0.1 * i as f64).collect()
    }

    fn admissible() -> Vec<LogParams> {
        vec![
            lp(2.0, 1.0),
            lp(1.5, 0.5),
            lp(0.5, 1.0),
            lp(1.0, 3.0),
            lp(2.0, 0.5),
            lp(0.3, 1.7),
            lp(1.001, 0.999),
            LogParams::natural(),
        ]
    }

    #[test]
    fn family_maps() {
        let t = make_params(LogFamily::Tsallis { t: 2.0 }).unwrap();
        assert_eq!((t.a(), t.b()), (2.0, 1.0));
        let k = make_params(LogFamily::Kaniadakis { k: 0.5 }).unwrap();
        assert_eq!((k.a(), k.b()), (1.5, 0.5));
        let z = make_params(LogFamily::Abe { z: 2.0 }).unwrap();
        assert_eq!((z.a(), z.b()), (2.0, 0.5));
        let g = make_params(LogFamily::Gamma { gamma: 0.25 }).unwrap();
        assert_eq!((g.a(), g.b()), (1.5, 0.75));
        let kls = make_params(LogFamily::Kls { r: 0.1, k: 0.4 }).unwrap();
        assert!((kls.a() - 1.5).abs() < 1e-15 && (kls.b() - 0.7).abs() < 1e-15);
        assert!(make_params(LogFamily::Shannon).unwrap().is_natural());
    }

    #[test]
    fn inadmissible_params_rejected() {
        assert!(matches!(
            make_params(LogFamily::Tsallis { t: -1.0 }),
            Err(Error::InadmissibleParams { .. })
        ));
        // Tsallis t = 1 collapses to a = b.
        assert!(make_params(LogFamily::Tsallis { t: 1.0 }).is_err());
        assert!(make_params(LogFamily::Kaniadakis { k: 1.5 }).is_err());
        assert!(make_params(LogFamily::Abe { z: 0.0 }).is_err());
        assert!(LogParams::new(1.5, 1.2).is_err());
        assert!(LogParams::new(0.5, 0.9).is_err());
        assert!(LogParams::new(1.0, 1.0 + 1e-13).is_err());
        assert!(LogParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn frozen_values() {
        assert_eq!(lp(2.0, 1.0).log(1.0).unwrap(), 0.0);
        assert!((lp(2.0, 1.0).log(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((lp(1.5, 0.5).log(4.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((lp(2.0, 1.0).dlog(2.0).unwrap() - 1.0).abs() < 1e-15);
        for params in admissible() {
            assert_eq!(params.log(1.0).unwrap(), 0.0);
            assert!((params.dlog(1.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        let params = lp(2.0, 1.0);
        assert!(matches!(params.log(0.0), Err(Error::Domain { .. })));
        assert!(matches!(params.dlog(-1.0), Err(Error::Domain { .. })));
        assert!(LogParams::natural().log(0.0).is_err());
    }

    #[test]
    fn strictly_increasing_on_grid() {
        for params in admissible() {
            let g = grid();
            for w in g.windows(2) {
                assert!(params.dlog(w[0]).unwrap() > 0.0);
                assert!(params.log(w[1]).unwrap() > params.log(w[0]).unwrap());
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        for params in admissible() {
            for &s in &[0.3, 1.0, 2.5, 7.0] {
                let fd = (params.log(s + h).unwrap() - params.log(s - h).unwrap()) / (2.0 * h);
                let an = params.dlog(s).unwrap();
                assert!((fd - an).abs() <= 1e-6 * an.abs(), "{params:?} s={s}");
            }
        }
    }

    #[test]
    fn weight_signs() {
        for params in admissible() {
            let (wa, wb) = params.weights();
            assert!(wa >= 0.0 && wb <= 0.0, "{params:?}");
        }
        // b = 1 makes the second weight vanish.
        assert_eq!(lp(2.0, 1.0).weights().1, 0.0);
    }

    #[test]
    fn natural_limit_is_second_order() {
        for &eps in &[1e-3, 1e-4, 1e-5] {
            let params = lp(1.0 + eps, 1.0 - eps);
            for x in grid() {
                let ln_x = x.ln();
                let err = (params.log(x).unwrap() - ln_x).abs();
                assert!(err <= eps * eps * ln_x.abs().powi(3), "eps={eps} x={x} err={err}");
            }
        }
    }

    #[test]
    fn not_additive_over_products() {
        let params = lp(2.0, 1.0);
        let gap = (params.log(4.0).unwrap() - 2.0 * params.log(2.0).unwrap()).abs();
        assert!(gap > 0.5);
        let nat = LogParams::natural();
        assert!((nat.log(4.0).unwrap() - 2.0 * nat.log(2.0).unwrap()).abs() < 1e-15);
    }
}
