use std::path::PathBuf;
use std::process::ExitCode;

use blt_core::scenario::{self, Scenario, ScenarioConfig};
use clap::Parser;

/// Run a configured experiment and write its report and tables.
#[derive(Parser)]
#[command(name = "blt", version)]
struct Cli {
    scenario: Scenario,
    /// JSON scenario description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random fields; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ScenarioConfig::from_path(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    match scenario::run(cfg, Some(cli.scenario), cli.out, cli.seed, &base) {
        Ok(report) => {
            for c in &report.checks {
                let tag = if c.passed { "ok  " } else { "FAIL" };
                println!("{tag} {}: {}", c.name, c.detail);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
