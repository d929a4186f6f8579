//! Command-line front end for the `rbi` simulator: config loading, command dispatch and
//! byte-stable CSV/JSON reporting.

#![forbid(unsafe_code)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::Parser;

use args::{Cli, Command};
pub use error::{CliError, CliResult};

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Sweep(args) => commands::sweep_cmd(args),
        Command::Geometry(cmd) => commands::geometry(cmd),
        Command::Trajectory(args) => commands::trajectory(args),
        Command::Prop1Harness(args) => commands::prop1(args),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("rbi: {err}");
            err.exit_code()
        }
    }
}
