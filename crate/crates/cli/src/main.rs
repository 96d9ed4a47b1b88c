use clap::error::ErrorKind;
use clap::Parser;
use momentum_cli::args::Cli;
use momentum_cli::error::exit;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::INVALID_INPUT,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match momentum_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("momentum: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
