use std::process::ExitCode;

use clap::Parser;
use divlab_cli::{report_error, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = cli.command.split();
    match run(stage, args) {
        Ok(dir) => {
            println!("{}", dir.join("summary.txt").display());
            ExitCode::SUCCESS
        }
        Err(e) => ExitCode::from(report_error(&e)),
    }
}
