//! Command-line front-end for `waveseg-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::time::Instant;

use args::{Cli, Command};
use commands::Run;
use error::CliError;

/// Runs one parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("could not start thread pool: {e}")))?;
    }
    let run = Run {
        threads: cli.threads,
        reproducible: cli.reproducible,
        started: Instant::now(),
    };
    match &cli.command {
        Command::Phantom(a) => commands::phantom(&run, a),
        Command::Decompose(a) => commands::decompose(&run, a),
        Command::Cluster(a) => commands::cluster(&run, a),
        Command::Acwe(a) => commands::acwe(&run, a),
        Command::Evaluate(a) => commands::evaluate(&run, a),
    }
}
