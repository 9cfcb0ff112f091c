//! Command-line driver: builds workloads, runs the reverse skyline and
//! k-MAC evaluators, and writes hardware-independent metrics as CSV.

pub mod args;
pub mod error;
pub mod report;
pub mod run;
pub mod workload;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

pub use args::Cli;
pub use error::CliError;
pub use workload::{Source, Workload};

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    use args::Command;
    match &cli.command {
        Command::Gen(a) => run::gen(a),
        Command::Query(a) => run::query(a)?.write(&a.workload),
        Command::Kmac(a) => run::kmac(a)?.write(&a.workload),
        Command::Sweep(a) => run::sweep(a)?.write(&a.workload),
    }
}

/// Parses `args` and runs the command. Exit codes: 0 success, 1 usage or
/// validation error, 2 runtime failure.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
