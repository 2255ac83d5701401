mod args;
mod commands;
mod fspec;
mod render;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Guard(String),
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Guard(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Guard(m) | CliError::Mismatch(m) => m,
        }
    }
}

impl From<fullcorr::Error> for CliError {
    fn from(e: fullcorr::Error) -> Self {
        match e {
            fullcorr::Error::SizeGuardExceeded { .. } => CliError::Guard(format!("size guard: {e}")),
            fullcorr::Error::EnumerationGuardExceeded { .. } => {
                CliError::Guard(format!("enumeration guard: {e}"))
            }
            other => CliError::Usage(other.to_string()),
        }
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
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
