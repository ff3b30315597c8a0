use std::process::ExitCode;

use clap::Parser;
use invsep_cli::config::SEED_ENV;
use invsep_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    match invsep_cli::run(&cli, env_seed.as_deref()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("invsep: {e}");
            ExitCode::from(e.code)
        }
    }
}
