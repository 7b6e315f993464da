//! `qrbsde` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 numerical failure, 3 I/O.

pub mod args;
mod commands;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<qrbsde::Error> for CliError {
    fn from(e: qrbsde::Error) -> Self {
        use qrbsde::Error as E;
        match e {
            E::Domain(_) | E::Capacity { .. } | E::Contract(_) => CliError::Usage(e.to_string()),
            E::Simulation { .. } | E::Numerical { .. } => CliError::Numeric(e.to_string()),
            E::Artifact(_) | E::Json(_) => CliError::Io(e.to_string()),
        }
    }
}

/// Parses `argv` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Bench(a) => commands::bench(a),
        Command::MindexCard(a) => commands::mindex_card(a),
        Command::DistCheck(a) => commands::dist_check(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qrbsde: {e}");
            e.exit_code()
        }
    }
}
