use std::process::ExitCode;

use clap::Parser;
use dgeeg_cli::{run, Cli, Completion};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Completion::Complete) => ExitCode::SUCCESS,
        Ok(Completion::Partial) if cli.allow_partial => ExitCode::SUCCESS,
        Ok(Completion::Partial) => {
            eprintln!("error: some dipoles failed (rerun with --allow-partial to accept)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
