//! Batch front-end for `invsep`: symmetrize, separate, and run the casebook.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{Cli, Command, RunConfig};
pub use error::CliError;

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, env_seed: Option<&str>) -> Result<u8, CliError> {
    match &cli.command {
        Command::Symmetrize { input, m, numeric, common } => {
            commands::cmd_symmetrize(input, *m, *numeric, &RunConfig::resolve(common, env_seed)?)
        }
        Command::Separate { input, common } => commands::cmd_separate(input, &RunConfig::resolve(common, env_seed)?),
        Command::Casebook { cases, params, list, common } => {
            commands::cmd_casebook(cases, params.as_deref(), *list, &RunConfig::resolve(common, env_seed)?)
        }
    }
}
