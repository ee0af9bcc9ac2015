use std::path::Path;

use divgrad_core::checks::{catalog, describe, run_suite_on, CheckOptions, Suite};
use divgrad_core::solver::sgm_solve;
use divgrad_core::textio::{format_number, format_vector};
use divgrad_core::verify::weighted_sum;
use divgrad_core::{Algorithm, IterateTrace, LinearModel, SolverOptions, StopReason};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{CheckArgs, EvalArgs, SolveArgs};
use crate::config::{read_matrix, RunConfig};
use crate::failure::{Failure, Outcome, EXIT_SOLVER};

/// Allowed rise of the divergence between accepted iterates.
pub const MONOTONE_SLACK: f64 = 1e-12;
pub const REDUCTION_TARGET: f64 = 0.99;
pub const CONSERVATION_TOL: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub command: &'static str,
    pub config: RunConfig,
    pub subject: String,
    pub value: f64,
    pub grad: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub strict: bool,
    pub case_tag: String,
    /// `|Σ q grad| / Σ |q grad|`; zero for invariant forms
    pub stationarity_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub subject: String,
    pub trials: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub command: &'static str,
    pub config: RunConfig,
    pub n: usize,
    pub trials: usize,
    pub given_inputs: bool,
    pub checks: Vec<CheckRow>,
    pub failures: usize,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub command: &'static str,
    pub config: RunConfig,
    pub subject: String,
    pub algorithm: Algorithm,
    pub rows: usize,
    pub cols: usize,
    pub sum_constraint: Option<f64>,
    pub iterations: usize,
    pub stop: Option<StopReason>,
    pub initial_divergence: f64,
    pub final_divergence: f64,
    pub reduction: f64,
    pub increases: usize,
    /// `max_k |Σx_k - C| / C`, with `C` the constraint or `Σx⁰`
    pub conservation_residual: f64,
    /// whether `Σx` is expected to stay at `C`
    pub conserving: bool,
    pub max_normalization_residual: f64,
    pub error: Option<String>,
    pub pass: bool,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(text: &str, out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::config(anyhow::Error::new(e).context(format!("writing {}", path.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn eval(args: &EvalArgs, canonical_sum: bool) -> Outcome<()> {
    let config = RunConfig::resolve(&args.objective, canonical_sum)?;
    let obj = config.objective(config.require_family()?)?;
    let p = config.field(&args.p, "p")?;
    let q = config.field(&args.q, "q")?;
    let ev = obj.evaluate(&p, &q).map_err(|e| Failure::from_core("evaluation", e))?;
    let d = ev.decomposition;
    let (s, m) = weighted_sum(&q, &d.grad);
    let report = EvalReport {
        command: "eval",
        subject: describe(&obj),
        config,
        value: ev.value,
        stationarity_residual: if m > 0.0 { s.abs() / m } else { 0.0 },
        grad: d.grad,
        u: d.u,
        v: d.v,
        strict: d.strict,
        case_tag: ev.case_tag,
    };
    emit(&to_json(&report), args.out.as_deref())
}

pub fn check(args: &CheckArgs, canonical_sum: bool) -> Outcome<()> {
    let config = RunConfig::resolve(&args.objective, canonical_sum)?;
    let objectives = match config.family {
        Some(f) => vec![config.objective(f)?],
        None => catalog(),
    };
    let suites = if args.suite.is_empty() { Suite::ALL.to_vec() } else { args.suite.clone() };
    let pair = match (&args.p, &args.q) {
        (Some(p), Some(q)) => Some((config.field(p, "p")?, config.field(q, "q")?)),
        _ => None,
    };
    if args.n == 0 || args.trials == 0 {
        return Err(Failure::config(anyhow::anyhow!("--n and --trials must be positive")));
    }
    let opts = CheckOptions {
        n: args.n,
        trials: args.trials,
        corrupt_gradient: args.corrupt_gradient,
        ..CheckOptions::default()
    };
    let mut checks = Vec::new();
    for (i, obj) in objectives.iter().enumerate() {
        for &suite in &suites {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i as u64));
            let given = pair.as_ref().map(|(p, q)| (p, q));
            let outcome = run_suite_on(suite, obj, &mut rng, &opts, given)
                .map_err(|e| Failure::from_core(&format!("{} on {}", suite.name(), describe(obj)), e))?;
            if let Some(o) = outcome {
                checks.push(CheckRow {
                    suite: o.suite.name(),
                    subject: o.subject,
                    trials: o.trials,
                    worst: o.worst,
                    tolerance: o.tolerance,
                    pass: o.pass,
                });
            }
        }
    }
    if checks.is_empty() {
        return Err(Failure::config(anyhow::anyhow!("none of the selected suites applies to the selected objective")));
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    let report = CheckReport {
        command: "check",
        config,
        n: args.n,
        trials: args.trials,
        given_inputs: pair.is_some(),
        checks,
        failures,
        pass: failures == 0,
    };
    emit(&to_json(&report), args.out.as_deref())?;
    if failures > 0 {
        return Err(Failure::check(format!("{failures} of {} checks failed", report.checks.len())));
    }
    Ok(())
}

fn trace_csv(trace: &IterateTrace) -> String {
    let mut out = String::from("k,divergence,step,sum_x,min_x\n");
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            format_number(r.divergence),
            format_number(r.step),
            format_number(r.sum_x),
            format_number(r.min_x)
        ));
    }
    out
}

pub fn solve(args: &SolveArgs, canonical_sum: bool) -> Outcome<()> {
    let config = RunConfig::resolve(&args.objective, canonical_sum)?;
    let obj = config.objective(config.require_family()?)?;
    let (rows, cols, h) = read_matrix(&args.h)?;
    let y = config.field(&args.y, "y")?;
    let model = LinearModel::new(rows, cols, h, y).map_err(|e| Failure::from_core("model", e))?;
    let x0 = match &args.x0 {
        Some(arg) => config.field(arg, "x0")?.into_vec(),
        None => {
            let total = args.sum.unwrap_or_else(|| model.y().total());
            vec![total / cols as f64; cols]
        }
    };
    let opts = SolverOptions {
        algorithm: args.algo,
        max_iters: args.max_iter,
        rel_tol: args.tol,
        sum_constraint: args.sum,
        ..SolverOptions::default()
    };
    opts.validate().map_err(|e| Failure::from_core("solver options", e))?;
    let (x, trace, stop, failure) = match sgm_solve(&model, &obj, &x0, &opts) {
        Ok(out) => (out.x, out.trace, Some(out.stop), None),
        Err(fail) => {
            let f = Failure::from_core("solve", fail.error.clone());
            // once iterating, any error is a breakdown of the iteration
            if f.code != EXIT_SOLVER && fail.trace.records.is_empty() {
                return Err(f);
            }
            let f = Failure::solver(anyhow::Error::new(fail.error).context("solve"));
            (fail.x, fail.trace, None, Some(f))
        }
    };
    let target = args.sum.unwrap_or_else(|| x0.iter().sum());
    let conserving = args.sum.is_some() || (obj.is_invariant() && args.algo == Algorithm::Additive);
    let d0 = trace.initial().map_or(f64::NAN, |r| r.divergence);
    let d1 = trace.last().map_or(f64::NAN, |r| r.divergence);
    let reduction = if d0 > 0.0 { 1.0 - d1 / d0 } else { 1.0 };
    let conservation_residual = trace
        .records
        .iter()
        .map(|r| (r.sum_x - target).abs() / target)
        .fold(0.0, f64::max);
    let max_normalization_residual = trace.records.iter().map(|r| r.normalization).fold(0.0, f64::max);
    let increases = trace.increases(MONOTONE_SLACK).len();
    let pass = failure.is_none()
        && increases == 0
        && reduction >= REDUCTION_TARGET
        && (!conserving || conservation_residual <= CONSERVATION_TOL)
        && max_normalization_residual <= NORMALIZATION_TOL;
    let summary = SolveSummary {
        command: "solve",
        subject: describe(&obj),
        config,
        algorithm: args.algo,
        rows,
        cols,
        sum_constraint: args.sum,
        iterations: trace.iterations(),
        stop,
        initial_divergence: d0,
        final_divergence: d1,
        reduction,
        increases,
        conservation_residual,
        conserving,
        max_normalization_residual,
        error: failure.as_ref().map(|f| f.to_string()),
        pass,
    };
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::config(anyhow::Error::new(e).context(format!("creating {}", args.out.display()))))?;
    let write = |name: &str, text: String| emit(&text, Some(&args.out.join(name)));
    write("trace.csv", trace_csv(&trace))?;
    write("x.csv", format_vector(&x))?;
    write("summary.json", to_json(&summary))?;
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
