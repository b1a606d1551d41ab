use std::path::PathBuf;
use std::process::ExitCode;

use arms_race_lab::{execute, LabError, OutputFormat, Subcommand};
use clap::Parser;

/// Runs contest-model experiments described by a scenario file.
#[derive(Debug, Parser)]
#[command(name = "arms-race-lab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Scenario file of `section.key = value` lines.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the emitted artifacts; created if missing.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Overrides the scenario's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::fs::read_to_string(&cli.scenario)
        .map_err(|source| LabError::Io {
            path: cli.scenario.clone(),
            source,
        })
        .and_then(|text| execute(cli.subcommand, &text, &cli.out_dir, cli.format, cli.seed));
    match result {
        Ok(inv) => {
            for path in &inv.written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                LabError::Io { path, .. } if *path == cli.scenario => 1,
                _ => e.exit_code(),
            };
            ExitCode::from(code as u8)
        }
    }
}
