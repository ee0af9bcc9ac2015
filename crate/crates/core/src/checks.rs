//! Identity suites run against random instances. The CLI `check`
//! subcommand and the acceptance tests both call these.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deformed_log::LogParams;
use crate::divergences::DivergenceParams;
use crate::error::{param_err, Result};
use crate::field::Field;
use crate::invariance::{factor_ode_residual, nominal_factor, star_factor, NominalFamily};
use crate::logdiv::{Family, Objective, Transform, Variant};
use crate::verify::{fd_gradient, max_rel_diff, random_field, rel_diff, scan_minimize, weighted_sum, FdSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// analytic gradient against central differences
    Gradient,
    /// `U - V = -grad` and positivity
    Consistency,
    /// value unchanged by `q <- λ q`
    Invariance,
    /// `Σ q_j grad_j = 0`
    Stationarity,
    /// closed-form nominal factor against a 1-D scan
    Nominal,
    /// homogeneity equation of the invariance factor
    Ode,
    /// `(a, b) = (2, 1)` reproduces the untransformed divergence
    Collapse,
    /// `(a, b) = (1 + ε, 1 - ε)` approaches the natural logarithm
    Limit,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Gradient,
        Suite::Consistency,
        Suite::Invariance,
        Suite::Stationarity,
        Suite::Nominal,
        Suite::Ode,
        Suite::Collapse,
        Suite::Limit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Gradient => "gradient",
            Suite::Consistency => "consistency",
            Suite::Invariance => "invariance",
            Suite::Stationarity => "stationarity",
            Suite::Nominal => "nominal",
            Suite::Ode => "ode",
            Suite::Collapse => "collapse",
            Suite::Limit => "limit",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.to_ascii_lowercase())
            .ok_or_else(|| param_err(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub n: usize,
    pub trials: usize,
    pub lo: f64,
    pub hi: f64,
    /// Perturb the analytic gradient; a negative control for the suites.
    pub corrupt_gradient: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            n: 8,
            trials: 100,
            lo: 0.1,
            hi: 10.0,
            corrupt_gradient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub subject: String,
    pub trials: usize,
    /// worst residual, already divided by its scale
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const FD_TOL: f64 = 1e-5;
pub const CONSISTENCY_TOL: f64 = 1e-10;
pub const INVARIANCE_TOL: f64 = 1e-9;
pub const STATIONARITY_TOL: f64 = 1e-8;
pub const NOMINAL_TOL: f64 = 1e-6;
pub const ODE_TOL: f64 = 1e-6;
pub const COLLAPSE_TOL: f64 = 1e-12;
pub const LIMIT_EPS: f64 = 1e-3;

/// Short label for reports, e.g. `alphabeta/nominal/logd(1.5,0.5) alpha=-1 beta=3`.
pub fn describe(obj: &Objective) -> String {
    let tr = match obj.transform() {
        Transform::Plain => "plain".to_string(),
        Transform::Log(lp) if lp.is_natural() => "ln".to_string(),
        Transform::Log(lp) => format!("logd({},{})", lp.a(), lp.b()),
    };
    let dp = obj.params();
    let params = match obj.family() {
        Family::Alpha => format!(" alpha={}", dp.alpha),
        Family::Beta => format!(" beta={}", dp.beta),
        Family::AlphaBeta => format!(" alpha={} beta={}", dp.alpha, dp.beta),
        Family::DualKl => String::new(),
        _ => format!(" alpha={}", dp.alpha),
    };
    let variant = match obj.variant() {
        Variant::Base => "base",
        Variant::Nominal => "nominal",
        _ => "star",
    };
    format!("{}/{}/{}{}", obj.family().name(), variant, tr, params)
}

/// The transforms exercised by the catalog: untransformed, natural and both
/// orderings of the deformed parameters.
pub fn catalog_transforms() -> [Transform; 4] {
    [
        Transform::Plain,
        Transform::Log(LogParams::natural()),
        Transform::Log(LogParams::new(1.5, 0.5).expect("admissible")),
        Transform::Log(LogParams::new(0.6, 1.8).expect("admissible")),
    ]
}

/// Every family, sign case, variant and transform.
pub fn catalog() -> Vec<Objective> {
    let mut params: Vec<(Family, Vec<Variant>, Vec<DivergenceParams>)> = vec![
        (
            Family::Alpha,
            vec![Variant::Base, Variant::Nominal],
            [0.5, 2.0, -0.5].map(DivergenceParams::alpha).to_vec(),
        ),
        (
            Family::Beta,
            vec![Variant::Base, Variant::Nominal],
            [0.5, 2.0, -0.5].map(DivergenceParams::beta).to_vec(),
        ),
        (
            Family::AlphaBeta,
            vec![Variant::Base, Variant::Nominal],
            [(2.0, 2.0), (0.8, 0.5), (0.2, 0.5), (-1.0, 3.0), (-2.0, 1.5), (-1.0, 0.5)]
                .map(|(a, b)| DivergenceParams::alpha_beta(a, b))
                .to_vec(),
        ),
    ];
    for fam in [Family::GeometricHarmonic, Family::ArithmeticGeometric, Family::ArithmeticHarmonic] {
        params.push((fam, vec![Variant::Base, Variant::Star], [0.3, 0.7].map(DivergenceParams::alpha).to_vec()));
    }
    for fam in [Family::F, Family::G] {
        params.push((fam, vec![Variant::Base, Variant::Star], [0.0, 0.4].map(DivergenceParams::alpha).to_vec()));
    }
    params.push((
        Family::DualKl,
        vec![Variant::Base, Variant::Star, Variant::Nominal],
        vec![DivergenceParams::default()],
    ));

    let mut out = Vec::new();
    for (fam, variants, dps) in params {
        for variant in variants {
            for dp in &dps {
                for tr in catalog_transforms() {
                    // rejected combinations (nominal dual KL with a deformed log) are skipped
                    if let Ok(obj) = Objective::new(fam, variant, *dp, tr) {
                        out.push(obj);
                    }
                }
            }
        }
    }
    out
}

fn nominal_of(obj: &Objective) -> Option<NominalFamily> {
    if obj.variant() != Variant::Nominal {
        return None;
    }
    match obj.family() {
        Family::Alpha => Some(NominalFamily::Alpha),
        Family::Beta => Some(NominalFamily::Beta),
        Family::AlphaBeta => Some(NominalFamily::AlphaBeta),
        Family::DualKl => Some(NominalFamily::DualKl),
        _ => None,
    }
}

fn corrupt(grad: &mut [f64], on: bool) {
    if on {
        grad[0] += 1e-3 * grad[0].abs().max(1e-3);
    }
}

/// Runs one suite on `opts.trials` random instances. Returns `None` when the
/// suite does not apply to the objective.
pub fn run_suite<R: Rng + ?Sized>(
    suite: Suite,
    obj: &Objective,
    rng: &mut R,
    opts: &CheckOptions,
) -> Result<Option<CheckOutcome>> {
    run_suite_on(suite, obj, rng, opts, None)
}

/// [`run_suite`] on a single given pair instead of random instances when
/// `pair` is set. `rng` still drives the suites that sample extra points.
pub fn run_suite_on<R: Rng + ?Sized>(
    suite: Suite,
    obj: &Objective,
    rng: &mut R,
    opts: &CheckOptions,
    pair: Option<(&Field, &Field)>,
) -> Result<Option<CheckOutcome>> {
    let applies = match suite {
        Suite::Gradient | Suite::Consistency => true,
        Suite::Invariance | Suite::Stationarity => obj.is_invariant(),
        Suite::Nominal => nominal_of(obj).is_some(),
        Suite::Ode => obj.is_invariant(),
        Suite::Collapse => {
            matches!(obj.transform(), Transform::Plain)
                && !matches!(obj.family(), Family::F | Family::G | Family::DualKl)
        }
        Suite::Limit => matches!(obj.transform(), Transform::Log(lp) if lp.is_natural()),
    };
    if !applies {
        return Ok(None);
    }
    let (tolerance, mut worst) = match suite {
        Suite::Gradient => (FD_TOL, 0.0),
        Suite::Consistency => (CONSISTENCY_TOL, 0.0),
        Suite::Invariance => (INVARIANCE_TOL, 0.0),
        Suite::Stationarity => (STATIONARITY_TOL, 0.0),
        Suite::Nominal => (NOMINAL_TOL, 0.0),
        Suite::Ode => (ODE_TOL, 0.0),
        Suite::Collapse => (COLLAPSE_TOL, 0.0),
        Suite::Limit => (1.0, 0.0),
    };
    let mut pass = true;
    let trials = if pair.is_some() { 1 } else { opts.trials };
    for _ in 0..trials {
        let (p, q) = match pair {
            Some((p, q)) => (p.clone(), q.clone()),
            None => (
                random_field(rng, opts.n, opts.lo, opts.hi),
                random_field(rng, opts.n, opts.lo, opts.hi),
            ),
        };
        let r = match suite {
            Suite::Gradient => gradient_error(obj, &p, &q, opts.corrupt_gradient)?,
            Suite::Consistency => {
                let mut d = obj.decompose(&p, &q)?;
                corrupt(&mut d.grad, opts.corrupt_gradient);
                if d.strict && !d.all_positive() {
                    pass = false;
                }
                d.consistency_residual()
            }
            Suite::Invariance => {
                let d = obj.value(&p, &q)?;
                let mut w: f64 = 0.0;
                for lambda in [0.1, 3.0, 10.0] {
                    let dl = obj.value(&p, &q.scaled(lambda)?)?;
                    w = w.max((dl - d).abs() / (1.0 + d.abs()));
                }
                w
            }
            Suite::Stationarity => {
                let mut d = obj.decompose(&p, &q)?;
                corrupt(&mut d.grad, opts.corrupt_gradient);
                let (s, m) = weighted_sum(&q, &d.grad);
                s.abs() / m.max(f64::MIN_POSITIVE)
            }
            Suite::Nominal => {
                let fam = nominal_of(obj).expect("checked above");
                let dp = obj.params();
                let k0 = nominal_factor(fam, &p, &q, &dp)?.value;
                let base = Objective::new(obj.family(), Variant::Base, dp, Transform::Plain)?;
                let scan = scan_minimize(
                    |k| base.value(&p, &q.scaled(k).expect("positive")).unwrap_or(f64::INFINITY),
                    (k0 * 1e-3, k0 * 1e3),
                )?;
                rel_diff(scan, k0, 0.0)
            }
            Suite::Ode => {
                let (k, res) = match nominal_of(obj) {
                    Some(fam) => {
                        let dp = obj.params();
                        let kf = |a: &Field, b: &Field| nominal_factor(fam, a, b, &dp).map(|f| f.value).unwrap_or(f64::NAN);
                        (kf(&p, &q), factor_ode_residual(kf, &p, &q))
                    }
                    None => {
                        let kf = |a: &Field, b: &Field| star_factor(a, b).map(|f| f.value).unwrap_or(f64::NAN);
                        (kf(&p, &q), factor_ode_residual(kf, &p, &q))
                    }
                };
                res.abs() / k
            }
            Suite::Collapse => {
                let deformed = Objective::new(
                    obj.family(),
                    obj.variant(),
                    obj.params(),
                    Transform::Log(LogParams::new(2.0, 1.0)?),
                )?;
                let a = obj.evaluate(&p, &q)?;
                let b = deformed.evaluate(&p, &q)?;
                let mut w = rel_diff(a.value, b.value, f64::MIN_POSITIVE);
                w = w.max(max_rel_diff(&a.decomposition.u, &b.decomposition.u, f64::MIN_POSITIVE));
                w.max(max_rel_diff(&a.decomposition.v, &b.decomposition.v, f64::MIN_POSITIVE))
            }
            Suite::Limit => limit_error(obj, &p, &q, rng)?,
        };
        if !(r <= tolerance) {
            pass = false;
        }
        worst = f64::max(worst, r);
    }
    Ok(Some(CheckOutcome {
        suite,
        subject: describe(obj),
        trials,
        worst,
        tolerance,
        pass,
    }))
}

/// Largest relative difference between the analytic gradient and central
/// differences of the value, after discounting the differencing noise.
///
/// With relative step `h`, rounding in the value (a few ulps of the term
/// scale `M`) perturbs component `j` of the difference quotient by about
/// `ε M / (h q_j)`; `FD_NOISE_ULPS` times that is subtracted before the
/// relative comparison.
pub fn gradient_error(obj: &Objective, p: &Field, q: &Field, corrupt_it: bool) -> Result<f64> {
    let spec = FdSpec::default();
    let ev = obj.evaluate(p, q)?;
    let mut grad = ev.decomposition.grad;
    corrupt(&mut grad, corrupt_it);
    let fd = fd_gradient(|x| obj.value(p, x).unwrap_or(f64::NAN), q, &spec)?;
    let mut worst: f64 = 0.0;
    for j in 0..q.len() {
        let noise = FD_NOISE_ULPS * f64::EPSILON * ev.scale / (spec.h * q[j]);
        let excess = ((grad[j] - fd[j]).abs() - noise).max(0.0);
        let denom = grad[j].abs().max(fd[j].abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(excess / denom);
    }
    Ok(worst)
}

/// Rounding budget of one evaluation, in ulps of its term scale.
pub const FD_NOISE_ULPS: f64 = 8.0;

/// Ratio of the error of `log_d` with `(1 + ε, 1 - ε)` against `ln`, at the
/// objective's inputs, to the bound `ε² |ln x|³` plus rounding; at most 1
/// when the bound holds. Also compares the objective's gradient with its
/// ε-deformed counterpart.
fn limit_error<R: Rng + ?Sized>(obj: &Objective, p: &Field, q: &Field, rng: &mut R) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for eps in [LIMIT_EPS, 1e-4, 1e-5] {
        let lp = LogParams::new(1.0 + eps, 1.0 - eps)?;
        for _ in 0..4 {
            let x: f64 = rng.random_range(0.1..10.0);
            let l = x.ln();
            let err = (lp.log(x)? - l).abs();
            worst = worst.max(err / (eps * eps * l.abs().powi(3) + 4.0 * f64::EPSILON * l.abs()));
        }
    }
    // gradient of the ε-deformed objective approaches the natural one
    let lp = LogParams::new(1.0 + 1e-5, 1.0 - 1e-5)?;
    if let Ok(near) = Objective::new(obj.family(), obj.variant(), obj.params(), Transform::Log(lp)) {
        let a = obj.decompose(p, q)?;
        let b = near.decompose(p, q)?;
        let scale = a.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let r = max_rel_diff(&a.grad, &b.grad, 1e-3 * scale.max(f64::MIN_POSITIVE));
        worst = worst.max(r / 1e-4);
    }
    Ok(worst)
}
