//! `netbenefit` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 internal
//! error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Lib(netbenefit::Error),
    Usage(String),
    /// An oracle check ran and failed.
    Check(String),
    Internal(String),
}

impl From<netbenefit::Error> for CliError {
    fn from(e: netbenefit::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 3,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::Check(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Check(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Curve(a) => commands::curve(a),
        Command::Cnb(a) => commands::cnb(a),
        Command::Compare(a) => commands::compare(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Demo(a) => commands::demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
