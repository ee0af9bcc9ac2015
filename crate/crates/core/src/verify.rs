//! Independent numerical oracles: central finite differences, a bracketing
//! golden-section scan, seeded random instances and a couple of comparators.
//!
//! The CLI `check` subcommand and the test suites both go through this
//! module.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// Finite-difference settings. The step for component `j` is `h * q_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSpec {
    pub h: f64,
}

impl Default for FdSpec {
    fn default() -> Self {
        Self { h: 1e-6 }
    }
}

/// Central-difference gradient of `f` at `q`.
pub fn fd_gradient<F>(f: F, q: &Field, spec: &FdSpec) -> Result<Vec<f64>>
where
    F: Fn(&Field) -> f64,
{
    if !(spec.h > 0.0 && spec.h < 1.0) {
        return Err(Error::Param(format!("finite-difference step h = {} must lie in (0, 1)", spec.h)));
    }
    let mut work = q.to_vec();
    let mut grad = Vec::with_capacity(q.len());
    for j in 0..q.len() {
        let step = spec.h * q[j];
        work[j] = q[j] + step;
        let up = f(&Field::new(work.clone())?);
        work[j] = q[j] - step;
        let down = f(&Field::new(work.clone())?);
        work[j] = q[j];
        // the actual spacing, after rounding of q_j +- step
        grad.push((up - down) / ((q[j] + step) - (q[j] - step)));
    }
    Ok(grad)
}

/// Number of coarse grid points used to bracket the minimum.
const SCAN_POINTS: usize = 400;

/// Minimizes a unimodal scalar function on `[lo, hi]`: coarse log-spaced
/// grid to bracket the minimum, then golden-section refinement.
pub fn scan_minimize<F>(f: F, bracket: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Bracket(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| (llo + (lhi - llo) * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&k| f(k)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Bracket("objective not finite anywhere on the bracket".into()))?;
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::Bracket(format!(
            "minimum on the bracket boundary at {} (no interior minimum)",
            grid[best]
        )));
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-14 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// A field of `n` components drawn uniformly from `[lo, hi)`.
pub fn random_field<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Field {
    Field::new((0..n).map(|_| rng.random_range(lo..hi)).collect()).expect("positive range")
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest component-wise relative difference, each component scaled by
/// `max(|a_j|, |b_j|, floor)`.
pub fn max_rel_diff(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| rel_diff(x, y, floor)).fold(0.0, f64::max)
}

/// `Σ_j q_j g_j` together with `Σ_j |q_j g_j|`, for stationarity checks.
pub fn weighted_sum(q: &[f64], g: &[f64]) -> (f64, f64) {
    q.iter()
        .zip(g)
        .fold((0.0, 0.0), |(s, m), (&qi, &gi)| (s + qi * gi, m + (qi * gi).abs()))
}
