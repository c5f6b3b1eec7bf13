//! Command-line front end for the `pulsechain` simulator: CSV sweeps, the
//! validation suite, and single-realization inspection.

pub mod config;
pub mod error;
pub mod output;
pub mod propagate;
pub mod sweep;
pub mod validate;

use std::path::{Path, PathBuf};

pub use config::{Cli, Command};
pub use error::{CliError, Result};

use config::{
    PropagateConfig, Settings, SweepCorrelationConfig, SweepLengthConfig, ValidateConfig,
};

/// Text produced by a command and where it should go.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub out: Option<PathBuf>,
    /// False only for a validation run with failing checks.
    pub passed: bool,
}

pub fn run(command: &Command) -> Result<Outcome> {
    run_with(command, &validate::Blocks::default())
}

/// As [`run`], with the block unitaries of the validation suite replaced.
pub fn run_with(command: &Command, blocks: &validate::Blocks) -> Result<Outcome> {
    let settings = Settings::from_options(command.options())?;
    let out = settings.out.clone();
    let (text, passed) = match command {
        Command::SweepLength(_) => (
            sweep::sweep_length(&SweepLengthConfig::resolve(&settings)?)?,
            true,
        ),
        Command::SweepCorrelation(_) => (
            sweep::sweep_correlation(&SweepCorrelationConfig::resolve(&settings)?)?,
            true,
        ),
        Command::Validate(_) => {
            let cfg = ValidateConfig::resolve(&settings)?;
            let report = validate::run_checks(&cfg, blocks);
            (report.render(&cfg), report.passed())
        }
        Command::Propagate(_) => (
            propagate::propagate(&PropagateConfig::resolve(&settings)?)?,
            true,
        ),
    };
    Ok(Outcome { text, out, passed })
}

/// Writes `text` to `path`, removing the file again if the write fails.
pub fn write_output(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| {
        let _ = std::fs::remove_file(path);
        CliError::Config(format!("cannot write {}: {e}", path.display()))
    })
}
