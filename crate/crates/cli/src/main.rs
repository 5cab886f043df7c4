use std::process::ExitCode;

use clap::Parser;
use cnqg_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("cnqg: {e}");
            e.exit().into()
        }
    }
}
