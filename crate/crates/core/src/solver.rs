//! Split-gradient iterations for `q = H x` under positivity and an optional
//! sum constraint.
//!
//! With `-∂D/∂x = U - V` (both pulled back through `Hᵀ`):
//!
//! * additive: `x <- x + α x ∘ (U - V)`
//! * preconditioned: `x <- x + α x ∘ (U / V - 1)`
//! * multiplicative: `x <- x ∘ U / V`
//!
//! The step `α` is capped so every component stays positive and then
//! chosen by Armijo backtracking. The multiplicative form always takes
//! `α = 1` without a line search; increases of the divergence are recorded,
//! not rejected.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::field::Field;
use crate::logdiv::Objective;

/// Dense non-negative `rows x cols` matrix, row-major, with measurements `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    rows: usize,
    cols: usize,
    h: Vec<f64>,
    y: Field,
}

impl LinearModel {
    /// Every entry must be finite and non-negative, and every row and every
    /// column must hold a positive entry so that `H x > 0` whenever `x > 0`.
    pub fn new(rows: usize, cols: usize, h: Vec<f64>, y: Field) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(param_err("the model matrix must be non-empty"));
        }
        if h.len() != rows * cols {
            return Err(Error::Shape {
                expected: rows * cols,
                found: h.len(),
            });
        }
        if y.len() != rows {
            return Err(Error::Shape {
                expected: rows,
                found: y.len(),
            });
        }
        if let Some(k) = h.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(param_err(format!(
                "matrix entry ({}, {}) = {} must be finite and non-negative",
                k / cols,
                k % cols,
                h[k]
            )));
        }
        if let Some(i) = (0..rows).find(|&i| h[i * cols..(i + 1) * cols].iter().all(|v| *v == 0.0)) {
            return Err(param_err(format!("matrix row {i} has no positive entry")));
        }
        if let Some(j) = (0..cols).find(|&j| (0..rows).all(|i| h[i * cols + j] == 0.0)) {
            return Err(param_err(format!("matrix column {j} has no positive entry")));
        }
        Ok(Self { rows, cols, h, y })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn matrix(&self) -> &[f64] {
        &self.h
    }

    pub fn y(&self) -> &Field {
        &self.y
    }

    /// `H x`.
    pub fn forward(&self, x: &[f64]) -> Result<Field> {
        if x.len() != self.cols {
            return Err(Error::Shape {
                expected: self.cols,
                found: x.len(),
            });
        }
        let q = self
            .h
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        Field::new(q)
    }
}

/// `Hᵀ g`: the gradient in `x` from the gradient in `q`.
pub fn chain_gradient(model: &LinearModel, gq: &[f64]) -> Result<Vec<f64>> {
    if gq.len() != model.rows {
        return Err(Error::Shape {
            expected: model.rows,
            found: gq.len(),
        });
    }
    let mut out = vec![0.0; model.cols];
    for (row, g) in model.h.chunks_exact(model.cols).zip(gq) {
        for (o, h) in out.iter_mut().zip(row) {
            *o += h * g;
        }
    }
    Ok(out)
}

/// Safety factor applied to the largest positivity-preserving step.
pub const STEP_SAFETY: f64 = 0.99;

/// Largest `α` keeping `x_j (1 + α d_j) > 0`, times [`STEP_SAFETY`];
/// `step_cap` when no component of `d` is negative.
pub fn max_step(x: &[f64], d: &[f64], step_cap: f64) -> f64 {
    debug_assert!(x.iter().all(|v| *v > 0.0));
    let bound = d.iter().filter(|v| **v < 0.0).map(|v| -1.0 / v).fold(f64::INFINITY, f64::min);
    if bound.is_finite() {
        (STEP_SAFETY * bound).min(step_cap)
    } else {
        step_cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoOptions {
    pub c1: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoOptions {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

/// Backtracks from `alpha_max` until `φ(α) <= φ(0) + c1 α φ'(0)`.
pub fn armijo_step<F>(mut phi: F, phi0: f64, dphi0: f64, alpha_max: f64, opts: &ArmijoOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(dphi0 < 0.0) {
        return Err(Error::NonDescent(format!("directional derivative {dphi0:e} is not negative")));
    }
    let mut alpha = alpha_max;
    for _ in 0..=opts.max_backtracks {
        let value = phi(alpha);
        if value.is_finite() && value <= phi0 + opts.c1 * alpha * dphi0 {
            return Ok(alpha);
        }
        alpha *= opts.shrink;
    }
    Err(Error::LineSearchFailure {
        backtracks: opts.max_backtracks,
        last_step: alpha / opts.shrink,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Additive,
    Preconditioned,
    Multiplicative,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "additive" => Ok(Algorithm::Additive),
            "preconditioned" => Ok(Algorithm::Preconditioned),
            "multiplicative" => Ok(Algorithm::Multiplicative),
            _ => Err(param_err(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub algorithm: Algorithm,
    pub max_iters: usize,
    /// Stop once the relative decrease stays below this for
    /// `stall_iters` consecutive iterations.
    pub rel_tol: f64,
    pub stall_iters: usize,
    /// Required `Σx`, restored after every preconditioned or multiplicative
    /// update. Invariant objectives only.
    pub sum_constraint: Option<f64>,
    pub armijo: ArmijoOptions,
    pub step_cap: f64,
    /// Largest accepted `|U - V + grad| / (U + V)` in `x`.
    pub consistency_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Additive,
            max_iters: 500,
            rel_tol: 1e-10,
            stall_iters: 5,
            sum_constraint: None,
            armijo: ArmijoOptions::default(),
            step_cap: 1e6,
            consistency_tol: 1e-8,
        }
    }
}

impl SolverOptions {
    /// Rejects non-positive tolerances, caps and iteration counts.
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(param_err("max_iters must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(param_err(format!("rel_tol = {} must be positive", self.rel_tol)));
        }
        if let Some(c) = self.sum_constraint {
            if !(c > 0.0 && c.is_finite()) {
                return Err(param_err(format!("sum constraint C = {c} must be positive")));
            }
        }
        let a = &self.armijo;
        if !(a.c1 > 0.0 && a.c1 < 1.0 && a.shrink > 0.0 && a.shrink < 1.0) {
            return Err(param_err("Armijo constants must lie in (0, 1)"));
        }
        if !(self.step_cap > 0.0) {
            return Err(param_err("step_cap must be positive"));
        }
        Ok(())
    }
}

/// One row of the trace. Row `k = 0` is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub divergence: f64,
    pub step: f64,
    pub sum_x: f64,
    pub min_x: f64,
    /// `max_j |U_j - V_j + grad_j| / (U_j + V_j)` in `x` at the previous
    /// iterate, where the direction was built.
    pub consistency: f64,
    /// Relative change of the divergence across the normalization step;
    /// zero when no normalization was applied.
    pub normalization: f64,
    /// `|Σx^k - Σx^(k-1)|`
    pub sum_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
}

impl IterateTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn initial(&self) -> Option<&IterateRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&IterateRecord> {
        self.records.last()
    }

    /// Iterations whose divergence exceeds the previous one by more than `slack`.
    pub fn increases(&self, slack: f64) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].divergence > w[0].divergence + slack)
            .map(|w| w[1].k)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// the gradient vanished or gave no descent direction
    Stationary,
    /// relative decrease below tolerance for several iterations
    Converged,
    /// the line search hit rounding noise before finding a decrease
    RoundingFloor,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub trace: IterateTrace,
    pub stop: StopReason,
}

/// A line-search failure is treated as convergence when the divergence is
/// below this multiple of its term scale.
pub const ROUNDING_FLOOR: f64 = 1e3 * f64::EPSILON;

/// A failed solve, with the last accepted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveFailure {
    pub error: Error,
    pub x: Vec<f64>,
    pub trace: IterateTrace,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.trace.iterations())
    }
}

impl std::error::Error for SolveFailure {}

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Multiplies by `target / Σx`.
pub fn normalize(x: &[f64], target: f64) -> Vec<f64> {
    let s = sum(x);
    x.iter().map(|v| v * target / s).collect()
}

struct Pulled {
    grad: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    consistency: f64,
}

fn pull_back(model: &LinearModel, d: &crate::logdiv::GradientDecomposition) -> Result<Pulled> {
    let grad = chain_gradient(model, &d.grad)?;
    let u = chain_gradient(model, &d.u)?;
    let v = chain_gradient(model, &d.v)?;
    let mut consistency: f64 = 0.0;
    for j in 0..grad.len() {
        let scale = (u[j] + v[j]).max(f64::MIN_POSITIVE);
        consistency = consistency.max((u[j] - v[j] + grad[j]).abs() / scale);
    }
    Ok(Pulled { grad, u, v, consistency })
}

/// Minimizes `x -> objective(y || H x)` from `x0`.
pub fn sgm_solve(
    model: &LinearModel,
    objective: &Objective,
    x0: &[f64],
    opts: &SolverOptions,
) -> std::result::Result<SolveOutcome, Box<SolveFailure>> {
    let fail = |error: Error, x: &[f64], trace: &IterateTrace| {
        Box::new(SolveFailure {
            error,
            x: x.to_vec(),
            trace: trace.clone(),
        })
    };
    let empty = IterateTrace::default();
    opts.validate().map_err(|e| fail(e, x0, &empty))?;
    if x0.len() != model.cols {
        return Err(fail(
            Error::Shape {
                expected: model.cols,
                found: x0.len(),
            },
            x0,
            &empty,
        ));
    }
    if let Some(i) = x0.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(fail(Error::Domain { index: i, value: x0[i] }, x0, &empty));
    }
    if let Some(c) = opts.sum_constraint {
        if !objective.is_invariant() {
            return Err(fail(
                param_err("a sum constraint needs a scale-invariant divergence (variant invariant, nominal or star)"),
                x0,
                &empty,
            ));
        }
        let s0 = sum(x0);
        if (s0 - c).abs() > 1e-9 * c {
            return Err(fail(param_err(format!("the starting point sums to {s0}, not to C = {c}")), x0, &empty));
        }
    }
    if opts.algorithm != Algorithm::Additive && !objective.is_strict() {
        return Err(fail(
            Error::NonDescent(
                "this decomposition has U or V that may vanish; use the additive algorithm or a deformed logarithm".into(),
            ),
            x0,
            &empty,
        ));
    }

    let y = model.y();
    let eval_at = |x: &[f64]| -> Result<crate::logdiv::Evaluation> { objective.evaluate(y, &model.forward(x)?) };
    let value_at = |x: &[f64]| -> f64 {
        model
            .forward(x)
            .and_then(|q| objective.value(y, &q))
            .unwrap_or(f64::NAN)
    };
    let normalizing = opts.sum_constraint.filter(|_| opts.algorithm != Algorithm::Additive);

    let mut x = x0.to_vec();
    let mut ev = eval_at(&x).map_err(|e| fail(e, &x, &empty))?;
    let mut trace = IterateTrace {
        records: vec![IterateRecord {
            k: 0,
            divergence: ev.value,
            step: 0.0,
            sum_x: sum(&x),
            min_x: min(&x),
            consistency: 0.0,
            normalization: 0.0,
            sum_drift: 0.0,
        }],
    };
    let mut stalled = 0;
    for k in 1..=opts.max_iters {
        let pb = pull_back(model, &ev.decomposition).map_err(|e| fail(e, &x, &trace))?;
        if !(pb.consistency <= opts.consistency_tol) {
            return Err(fail(
                Error::NonDescent(format!("U - V differs from -grad by {:e} (relative)", pb.consistency)),
                &x,
                &trace,
            ));
        }
        if pb.grad.iter().all(|g| *g == 0.0) {
            return Ok(SolveOutcome {
                x,
                trace,
                stop: StopReason::Stationary,
            });
        }

        let (x_prov, step) = match opts.algorithm {
            Algorithm::Multiplicative => {
                let next: Vec<f64> = (0..x.len()).map(|j| x[j] * pb.u[j] / pb.v[j]).collect();
                (next, 1.0)
            }
            alg => {
                let d: Vec<f64> = match alg {
                    Algorithm::Additive => (0..x.len()).map(|j| pb.u[j] - pb.v[j]).collect(),
                    _ => (0..x.len()).map(|j| pb.u[j] / pb.v[j] - 1.0).collect(),
                };
                let dphi0: f64 = (0..x.len()).map(|j| pb.grad[j] * x[j] * d[j]).sum();
                if !(dphi0 < 0.0) {
                    return Ok(SolveOutcome {
                        x,
                        trace,
                        stop: StopReason::Stationary,
                    });
                }
                let along = |a: f64| -> Vec<f64> { (0..x.len()).map(|j| x[j] * (1.0 + a * d[j])).collect() };
                let alpha_max = max_step(&x, &d, opts.step_cap);
                match armijo_step(|a| value_at(&along(a)), ev.value, dphi0, alpha_max, &opts.armijo) {
                    Ok(a) => (along(a), a),
                    // the divergence is already at the rounding level of its terms
                    Err(Error::LineSearchFailure { .. }) if ev.value.abs() <= ROUNDING_FLOOR * ev.scale => {
                        return Ok(SolveOutcome {
                            x,
                            trace,
                            stop: StopReason::RoundingFloor,
                        });
                    }
                    Err(e) => return Err(fail(e, &x, &trace)),
                }
            }
        };
        if let Some(i) = x_prov.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(fail(Error::Domain { index: i, value: x_prov[i] }, &x, &trace));
        }

        let (x_next, normalization) = match normalizing {
            Some(c) => {
                let before = value_at(&x_prov);
                let xn = normalize(&x_prov, c);
                let after = value_at(&xn);
                (xn, (after - before).abs() / before.abs().max(f64::MIN_POSITIVE))
            }
            None => (x_prov, 0.0),
        };
        let ev_next = eval_at(&x_next).map_err(|e| fail(e, &x, &trace))?;
        let drift = (sum(&x_next) - sum(&x)).abs();
        trace.records.push(IterateRecord {
            k,
            divergence: ev_next.value,
            step,
            sum_x: sum(&x_next),
            min_x: min(&x_next),
            consistency: pb.consistency,
            normalization,
            sum_drift: drift,
        });
        let rel_decrease = (ev.value - ev_next.value) / ev.value.abs().max(f64::MIN_POSITIVE);
        x = x_next;
        ev = ev_next;
        if rel_decrease < opts.rel_tol {
            stalled += 1;
            if stalled >= opts.stall_iters {
                return Ok(SolveOutcome {
                    x,
                    trace,
                    stop: StopReason::Converged,
                });
            }
        } else {
            stalled = 0;
        }
    }
    Ok(SolveOutcome {
        x,
        trace,
        stop: StopReason::MaxIters,
    })
}
