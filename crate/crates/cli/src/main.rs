use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pulsechain_cli::{run, write_output, Cli, CliError};

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(path) => write_output(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli.command).and_then(|outcome| {
        emit(&outcome.text, outcome.out.as_deref())?;
        if outcome.passed {
            Ok(())
        } else {
            Err(CliError::Validation("one or more checks failed".into()))
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pulsechain {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
