use std::process::ExitCode;

use clap::Parser;
use divgrad_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match divgrad_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("divgrad: {f}");
            f.exit_code()
        }
    }
}
