mod args;
mod commands;
mod render;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;

/// Exit status for a run whose planning or replay did not reach the goal.
/// Usage and input errors exit with 1.
#[derive(Debug)]
pub struct PlanningFailure(pub String);

impl std::fmt::Display for PlanningFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PlanningFailure {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match serde_json::to_string(&cli) {
        Ok(resolved) => eprintln!("config: {resolved}"),
        Err(e) => eprintln!("config: <unprintable: {e}>"),
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<PlanningFailure>() => {
            eprintln!("failure: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
