mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, EXIT_USAGE};

fn report(err: &CliError, command: &str) {
    let mut v = err.to_json(command);
    output::normalise(&mut v);
    eprintln!("{}", serde_json::to_string(&v).expect("valid JSON"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            report(&CliError::Usage(first.to_string()), "stark");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let result = match &cli.command {
        Command::Propagate(a) => commands::propagate(a),
        Command::Classify(a) => commands::classify(a),
        Command::Search(a) => commands::run_search(a),
        Command::Verify(a) => commands::verify(a),
        Command::Equilibrium(a) => commands::equilibrium(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e, cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
