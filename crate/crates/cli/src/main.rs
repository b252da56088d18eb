use std::process::ExitCode;

use clap::Parser;
use measurement_cli::{output, run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            match output::to_json(&outcome.stdout) {
                Ok(text) => println!("{text}"),
                Err(e) => {
                    eprintln!("measure-sim: {e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            }
            for r in outcome.reports.iter().filter(|r| !r.pass) {
                eprintln!("measure-sim: check `{}` failed (defect {:e}, tolerance {:e})", r.check, r.defect, r.tolerance);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("measure-sim: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
