//! `anyspeed` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or unexpected failure, 2 invalid usage or
//! input, 3 no seed or solver failure, 4 results that missed their quality
//! bar (unconverged points or unverified gates).

pub mod args;
pub mod commands;
pub mod table;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use anyspeed_core::Error as CoreError;
use clap::Parser;
use serde_json::Value;

use args::Command;
use table::Format;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_QUALITY: u8 = 4;

/// Invalid combination of arguments detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "anyspeed", version, about = "Single-qubit rotation pulses at arbitrary gate speed")]
pub struct Cli {
    /// Replay a run from a JSON output document or a bare configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file, or directory when the run writes several tables.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Reads a configuration: either the `config` member of an output document
/// or the configuration object itself.
pub fn load_config(path: &Path) -> Result<Command> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: invalid JSON: {e}", path.display())))?;
    if let Some(config) = doc.get_mut("config") {
        doc = config.take();
    }
    serde_json::from_value(doc).map_err(|e| UsageError(format!("{}: invalid configuration: {e}", path.display())).into())
}

/// Exit code for an error that stopped the run.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::InvalidArgument(_) | CoreError::SymmetryViolation(_) | CoreError::Plan(_) => EXIT_USAGE,
                CoreError::SeedNotFound(_) | CoreError::SolverFailure(_) | CoreError::IntegrationFailure { .. } => {
                    EXIT_SOLVER
                }
            };
        }
    }
    EXIT_FAILURE
}

fn execute(cli: Cli) -> Result<u8> {
    let command = match (cli.command, &cli.config) {
        (Some(_), Some(_)) => return Err(UsageError("--config replays a run and takes no subcommand".into()).into()),
        (Some(c), None) => c,
        (None, Some(path)) => load_config(path)?,
        (None, None) => return Err(UsageError("a subcommand or --config is required (see --help)".into()).into()),
    };
    let config = serde_json::to_value(&command)?;
    let outcome = commands::run(&command).with_context(|| format!("{} failed", command.name()))?;
    for path in table::emit(&outcome.tables, cli.output.as_deref(), cli.format, &config)? {
        eprintln!("wrote {}", path.display());
    }
    for problem in &outcome.problems {
        eprintln!("warning: {problem}");
    }
    Ok(if outcome.problems.is_empty() { EXIT_OK } else { EXIT_QUALITY })
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let code = |e: CoreError| exit_code(&anyhow::Error::new(e).context("outer"));
        assert_eq!(code(CoreError::InvalidArgument("x".into())), EXIT_USAGE);
        assert_eq!(code(CoreError::Plan("x".into())), EXIT_USAGE);
        assert_eq!(code(CoreError::SeedNotFound("x".into())), EXIT_SOLVER);
        assert_eq!(code(CoreError::SolverFailure("x".into())), EXIT_SOLVER);
        assert_eq!(exit_code(&UsageError("x".into()).into()), EXIT_USAGE);
        assert_eq!(exit_code(&anyhow::anyhow!("disk full")), EXIT_FAILURE);
    }

    #[test]
    fn parse_errors_are_usage_errors() {
        assert_eq!(run(["anyspeed", "seed", "--theta", "tau"]), EXIT_USAGE);
        assert_eq!(run(["anyspeed", "sweep", "--magnus-order", "4"]), EXIT_USAGE);
        assert_eq!(run(["anyspeed"]), EXIT_USAGE);
    }
}
