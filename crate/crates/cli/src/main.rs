use std::process::ExitCode;

use clap::Parser;
use coefficiency_cli::{execute, Cli};

fn main() -> ExitCode {
    execute(Cli::parse())
}
