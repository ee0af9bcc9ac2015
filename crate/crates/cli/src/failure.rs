use std::fmt;
use std::process::ExitCode;

use divgrad_core::Error;

/// A violated identity in `check`.
pub const EXIT_CHECK: u8 = 1;
/// Bad flags, unreadable or malformed input files, inadmissible parameters.
pub const EXIT_CONFIG: u8 = 2;
/// Non-positive or non-finite input components.
pub const EXIT_DOMAIN: u8 = 3;
/// The solver stopped on an error; the last valid iterate is still written.
pub const EXIT_SOLVER: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_CONFIG, error: error.into() }
    }

    pub fn domain(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_DOMAIN, error: error.into() }
    }

    pub fn solver(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_SOLVER, error: error.into() }
    }

    pub fn check(summary: String) -> Self {
        Self { code: EXIT_CHECK, error: anyhow::anyhow!(summary) }
    }

    /// Classifies a library error, prefixing `what` (e.g. `q`).
    pub fn from_core(what: &str, e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } => EXIT_DOMAIN,
            Error::LineSearchFailure { .. } | Error::NonDescent(_) => EXIT_SOLVER,
            _ => EXIT_CONFIG,
        };
        Self { code, error: anyhow::Error::new(e).context(what.to_string()) }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
