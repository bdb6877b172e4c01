//! `planogram`: simulate shelves, check them against a planogram, evaluate
//! the pipeline on a dataset.
//!
//! Exit status is 0 on success (and a compliant shelf), 1 when `check`
//! found compliance issues, 2 on usage or data errors.

use std::process::ExitCode;

use clap::Parser;

mod args;
mod check;
mod config;
mod evaluate;
mod simulate;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Check(a) => check::run(a),
        Command::Evaluate(a) => evaluate::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
