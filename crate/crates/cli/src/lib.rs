//! Command-line front end for the `noisy-momentum` library.

pub mod args;
pub mod commands;
pub mod error;
pub mod grid;
pub mod output;
pub mod settings;

use args::{Cli, Command};
use error::CliResult;
use settings::Settings;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Rate(a) => commands::rate(&Settings::resolve(&a.common, "rate")?),
        Command::Amplify(a) => commands::amplify(&Settings::resolve(&a.common, "amplify")?),
        Command::Sweep(a) => commands::sweep(&Settings::resolve(&a.common, "sweep")?),
        Command::Verify(a) => commands::verify(&Settings::resolve(&a.common, "verify")?, &a),
        Command::Simulate(a) => commands::simulate(&Settings::resolve(&a.common, "simulate")?, &a),
        Command::Continuous(a) => commands::continuous(&Settings::resolve(&a.common, "continuous")?, &a),
    }
}
