//! Front end for `divgrad-core`: argument grammar, input loading, JSON and
//! CSV reports, and exit-code mapping.

pub mod args;
pub mod commands;
pub mod config;
pub mod failure;

use args::{Cli, Command};
use failure::Outcome;

pub fn run(cli: &Cli) -> Outcome<()> {
    match &cli.command {
        Command::Eval(a) => commands::eval(a, cli.canonical_sum),
        Command::Check(a) => commands::check(a, cli.canonical_sum),
        Command::Solve(a) => commands::solve(a, cli.canonical_sum),
    }
}
