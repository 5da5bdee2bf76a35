use std::process::ExitCode;

use clap::Parser;

use pdmix_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    let stdout = std::io::stdout();
    match run(&config, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
