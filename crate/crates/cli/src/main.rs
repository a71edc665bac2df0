//! `spdc` command-line front end.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Everything that ends a run early, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, unknown crystal or role. Exit 1.
    Usage(String),
    /// Solver or model error. Exit 2.
    Domain { kind: &'static str, message: String },
    /// I/O problems. Exit 2.
    Io(anyhow::Error),
    /// The table comparison ran but some cell failed. Exit 3.
    Regression(String),
}

impl From<spdc_core::Error> for Failure {
    fn from(e: spdc_core::Error) -> Self {
        use spdc_core::Error;
        match e {
            Error::CrystalNotFound { .. } | Error::UnknownRole(_) => Failure::Usage(e.to_string()),
            e => Failure::Domain {
                kind: e.kind(),
                message: e.to_string(),
            },
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Dispersion(a) => commands::dispersion(&a),
        Command::GvmSolve(a) => commands::gvm_solve(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::TuningCurve(a) => commands::tuning_curve(&a),
        Command::Table1(a) => commands::table1(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error[usage]: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain { kind, message }) => {
            eprintln!("error[{kind}]: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error[io]: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Regression(msg)) => {
            eprintln!("regression: {msg}");
            ExitCode::from(3)
        }
    }
}
