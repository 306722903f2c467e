//! `emcom`: train and evaluate task-conditioned communicating agents.
//!
//! Subcommands: `train`, `sweep`, `eval`, `messages`. Exit codes: 0 success,
//! 2 config/usage error, 3 I/O error, 4 checkpoint incompatibility or
//! corruption, 5 partial sweep failure.

mod args;
mod artifacts;
mod commands;
mod runner;

use emcom_core::Error;

/// Top-level failure, carrying enough structure to pick the exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    /// Some sweep cells failed; the rest completed and were summarized.
    PartialSweep(Vec<String>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::PartialSweep(cells) => {
                write!(
                    f,
                    "{} sweep cell(s) failed: {}",
                    cells.len(),
                    cells.join("; ")
                )
            }
        }
    }
}

fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 2,
        CliError::PartialSweep(_) => 5,
        CliError::Core(e) => match e {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Bounds(_) => 2,
            Error::Io(_) => 3,
            Error::ChecksumMismatch(_) | Error::Incompatible(_) | Error::CheckpointFormat(_) => 4,
            _ => 1,
        },
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let command = match args::parse(&argv) {
        Ok(args::Parsed::Command(c)) => c,
        Ok(args::Parsed::Help) => {
            print!("{}", args::USAGE);
            return;
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{}", args::USAGE);
            std::process::exit(2);
        }
    };
    if let Err(err) = commands::run(command) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
