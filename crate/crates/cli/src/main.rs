use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use ids_polar_cli::{run, ExperimentConfig, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Stats,
    Lemma1,
    Mi,
    ParseAgreement,
    E2e,
    PadModel,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Lemma1 => "lemma1",
            Command::Mi => "mi",
            Command::ParseAgreement => "parse-agreement",
            Command::E2e => "e2e",
            Command::PadModel => "pad-model",
        }
    }
}

/// Experiments for guard-band polar codes on insertion/deletion/substitution channels.
#[derive(Debug, Parser)]
#[command(name = "ids-polar", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let result = ExperimentConfig::load(&args.config)
        .map(|c| {
            c.apply(&Overrides {
                seed: args.seed,
                trials: args.trials,
                out: args.out.clone(),
            })
        })
        .and_then(|cfg| {
            let report = run(args.command.name(), &cfg)?;
            let paths = report.write(&cfg)?;
            Ok((report, paths))
        });
    match result {
        Ok((report, (csv, json))) => {
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {} and {}", csv.display(), json.display());
            println!("wall-clock {:.3} s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
