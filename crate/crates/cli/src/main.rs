//! `treelet` command-line driver.
//!
//! Exit codes: 0 on success, 1 on a data or spec error, 2 on a usage error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Failure classes, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<treelet::Error> for CliError {
    fn from(e: treelet::Error) -> Self {
        use treelet::Error::*;
        match e {
            InvalidLevel { .. } | InvalidK { .. } | InvalidCv(_) => {
                CliError::Usage(format!("{}: {e}", variant_name(&e)))
            }
            _ => CliError::Data(format!("{}: {e}", variant_name(&e))),
        }
    }
}

fn variant_name(e: &treelet::Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
