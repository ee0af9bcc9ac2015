//! Deformed logarithms, power and mean-based divergences, scale invariance
//! and the gradient decompositions used by split-gradient solvers.

pub mod checks;
pub mod deformed_log;
pub mod divergences;
mod error;
mod field;
pub mod fixtures;
pub mod invariance;
pub mod logdiv;
pub mod solver;
pub mod textio;
pub mod verify;

pub use deformed_log::{dlog_d, log_d, make_params, LogFamily, LogParams};
pub use divergences::{BaseSplit, DivergenceParams, Partial, SplitCase};
pub use error::{Error, Result};
pub use field::{same_len, Field};
pub use invariance::{InvarianceFactor, InvariantFamily, NominalFamily, ProductSplit};
pub use logdiv::{Evaluation, Family, GradientDecomposition, Objective, Transform, Variant};
pub use solver::{
    Algorithm, IterateRecord, IterateTrace, LinearModel, SolveFailure, SolveOutcome, SolverOptions, StopReason,
};
