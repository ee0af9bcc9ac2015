//! Resolution of flags into library objects, and input loading.

use std::path::Path;

use divgrad_core::textio::{parse_matrix, parse_vector};
use divgrad_core::{make_params, DivergenceParams, Family, Field, LogFamily, LogParams, Objective, Transform, Variant};
use serde::Serialize;

use crate::args::{ObjectiveArgs, DEFAULT_SEED};
use crate::failure::{Failure, Outcome};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 1.5;

/// Resolved objective flags, echoed in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub family: Option<Family>,
    pub variant: Variant,
    pub alpha: f64,
    pub beta: f64,
    /// `plain`, `ln` or `logd(a,b)`
    pub log: String,
    pub floor: Option<f64>,
    pub seed: u64,
    pub canonical_sum: bool,
    #[serde(skip)]
    pub transform: Transform,
}

impl RunConfig {
    pub fn resolve(args: &ObjectiveArgs, canonical_sum: bool) -> Outcome<Self> {
        let transform = match (&args.log_family, args.log_a, args.log_b) {
            (Some(tag), _, _) => Transform::Log(parse_log_family(tag)?),
            (None, Some(a), Some(b)) => {
                Transform::Log(LogParams::new(a, b).map_err(|e| Failure::from_core("--log-a/--log-b", e))?)
            }
            _ => Transform::Plain,
        };
        if let Some(f) = args.floor {
            if !(f.is_finite() && f > 0.0) {
                return Err(Failure::config(anyhow::anyhow!("--floor must be finite and > 0, got {f}")));
            }
        }
        Ok(Self {
            family: args.family,
            variant: args.variant,
            alpha: args.alpha.unwrap_or(DEFAULT_ALPHA),
            beta: args.beta.unwrap_or(DEFAULT_BETA),
            log: transform_label(&transform),
            floor: args.floor,
            seed: args.seed.unwrap_or(DEFAULT_SEED),
            canonical_sum,
            transform,
        })
    }

    pub fn params(&self) -> DivergenceParams {
        DivergenceParams::alpha_beta(self.alpha, self.beta)
    }

    pub fn require_family(&self) -> Outcome<Family> {
        self.family
            .ok_or_else(|| Failure::config(anyhow::anyhow!("--family is required for this command")))
    }

    pub fn objective(&self, family: Family) -> Outcome<Objective> {
        Objective::new(family, self.variant, self.params(), self.transform)
            .map_err(|e| Failure::from_core("objective", e))
    }

    /// Reads a positive field, applying `--floor` first.
    pub fn field(&self, arg: &str, what: &str) -> Outcome<Field> {
        let mut values = read_vector(arg, what)?;
        if let Some(f) = self.floor {
            for v in values.iter_mut().filter(|v| v.is_finite()) {
                *v = v.max(f);
            }
        }
        Field::new(values).map_err(|e| Failure::from_core(what, e))
    }
}

pub fn transform_label(t: &Transform) -> String {
    match t {
        Transform::Plain => "plain".into(),
        Transform::Log(lp) if lp.is_natural() => "ln".into(),
        Transform::Log(lp) => format!("logd({},{})", lp.a(), lp.b()),
    }
}

/// `shannon`, `tsallis:T`, `kaniadakis:K`, `abe:Z`, `gamma:G` or `kls:R,K`.
pub fn parse_log_family(tag: &str) -> Outcome<LogParams> {
    let bad = |msg: String| Failure::config(anyhow::anyhow!("--log-family '{tag}': {msg}"));
    let (name, rest) = tag.split_once(':').unwrap_or((tag, ""));
    let nums = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("{s}: {e}"))))
            .collect::<Outcome<Vec<_>>>()?
    };
    let one = || match nums.as_slice() {
        [x] => Ok(*x),
        _ => Err(bad("expected one parameter".into())),
    };
    let family = match name.to_ascii_lowercase().as_str() {
        "shannon" | "natural" | "ln" if nums.is_empty() => LogFamily::Shannon,
        "tsallis" => LogFamily::Tsallis { t: one()? },
        "kaniadakis" => LogFamily::Kaniadakis { k: one()? },
        "abe" => LogFamily::Abe { z: one()? },
        "gamma" => LogFamily::Gamma { gamma: one()? },
        "kls" => match nums.as_slice() {
            [r, k] => LogFamily::Kls { r: *r, k: *k },
            _ => return Err(bad("expected two parameters r,k".into())),
        },
        _ => return Err(bad("unknown family".into())),
    };
    make_params(family).map_err(|e| Failure::from_core("--log-family", e))
}

/// A file with one value per line, or an inline comma-separated list,
/// optionally bracketed.
pub fn read_vector(arg: &str, what: &str) -> Outcome<Vec<f64>> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::config(anyhow::Error::new(e).context(format!("{what}: reading {arg}"))))?
    } else {
        arg.trim().trim_start_matches('[').trim_end_matches(']').to_string()
    };
    parse_vector(&text).map_err(|e| {
        Failure::config(anyhow::Error::new(e).context(format!("{what}: '{arg}' is neither a readable file nor a list of numbers")))
    })
}

/// Row-major matrix from CSV rows. Entries must be finite and non-negative.
pub fn read_matrix(path: &Path) -> Outcome<(usize, usize, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(anyhow::Error::new(e).context(format!("H: reading {}", path.display()))))?;
    let (rows, cols, h) = parse_matrix(&text).map_err(|e| Failure::from_core("H", e))?;
    if let Some(k) = h.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Failure::domain(anyhow::anyhow!(
            "H: entry ({}, {}) = {} must be finite and non-negative",
            k / cols,
            k % cols,
            h[k]
        )));
    }
    Ok((rows, cols, h))
}
