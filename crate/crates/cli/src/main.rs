use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = ampcs_cli::Cli::parse();
    match ampcs_cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
