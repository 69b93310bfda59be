use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use moe_cli::cli::{Cli, Command};
use moe_cli::commands::{self, StageOptions};
use moe_cli::config::{load_config, PipelineConfig};
use moe_cli::error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => PipelineConfig::default(),
    };
    let opts = StageOptions {
        out_dir: cli.out_dir.clone(),
        seed: cli.seed.unwrap_or(config.monte_carlo.base_seed),
        runs: cli.runs.unwrap_or(config.monte_carlo.n_runs),
        emit_svg: cli.emit_svg,
    };
    if opts.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".to_string()));
    }
    match cli.command {
        Command::Scenario => commands::scenario(&config, &opts),
        Command::Sense => commands::sense(&config, &opts),
        Command::Track => commands::track(&config, &opts),
        Command::Assess => commands::assess(&config, &opts),
        Command::Compare => commands::compare(&config, &opts),
        Command::Demo => commands::demo(),
        Command::Selftest => commands::selftest(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("usage: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
