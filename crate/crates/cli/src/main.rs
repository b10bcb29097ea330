//! `snewton`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 no convergence or a
//! numerical failure.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Command failure with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<snewton_core::Error> for Failure {
    fn from(e: snewton_core::Error) -> Self {
        use snewton_core::Error::*;
        match e {
            Singular { .. }
            | InconsistentSplit { .. }
            | NothingToDeflate
            | DeflationLimit(_)
            | ZeroMatrix => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Refine(a) => commands::refine(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Check(a) => commands::check(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
