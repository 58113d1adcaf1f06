use std::process::ExitCode;

use clap::Parser;
use spbm::cli::{execute, Cli, Outcome};
use spbm::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr();
    match execute(cli, &mut out, &mut err) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            // configuration problems share the usage exit code
            match e {
                Error::Config(_) | Error::InvalidParameter(_) | Error::Json(_) | Error::UnsupportedDimension(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
