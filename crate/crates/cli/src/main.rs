mod args;
mod commands;
mod document;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] syncopt::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Json(_) => 2,
            Self::Core(syncopt::Error::InvalidArgument(_) | syncopt::Error::InvalidControl(_)) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synthesize(a) => commands::synthesize_cmd(a),
        Command::RegimeMap(a) => commands::regime_map_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Verify(a) => commands::verify_cmd(a),
    };
    match outcome {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(syncopt::Error::SynthesisFailure { scanned, .. }) = &e {
                for (terminal_r, r_initial) in scanned {
                    eprintln!("  scanned R(T)={terminal_r:e} -> R(0)={r_initial:e}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
