//! `mfbose`: command-line front end for the mean-field Bose expansion library.

mod commands;
mod config;
mod error;
mod source;

use clap::Parser;
use config::{Command, Flags, RunConfig};
use error::CliError;
use std::io::Write;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "mfbose", version, about = "Expansions around Bogoliubov theory for mean-field Bose gases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

fn write_artifacts(config: &RunConfig, outcome: &commands::Outcome) -> Result<(), CliError> {
    let Some(dir) = &config.out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    for (name, content) in &outcome.artifacts {
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(cli.command, cli.flags)?;
    let outcome = commands::run(&config)?;
    write_artifacts(&config, &outcome)?;
    // a closed stdout (e.g. a pipe into `head`) is not an error
    let _ = writeln!(std::io::stdout(), "{}", outcome.summary);
    match outcome.failure {
        Some(reason) => Err(CliError::Assertion(reason)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
