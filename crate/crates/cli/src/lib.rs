//! Experiment harness for guard-band polar codes on IDS channels.
//!
//! Each subcommand reads an [`ExperimentConfig`], runs its Monte-Carlo or
//! exact computation and produces a [`Report`] that is written as
//! `<out>/<command>.csv` plus a versioned `<out>/<command>.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod record;

pub use commands::{cmd_e2e, cmd_lemma1, cmd_mi, cmd_pad_model, cmd_parse_agreement, cmd_stats};
pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
pub use record::{Check, Metric, Report, SCHEMA_VERSION};

/// Subcommand names accepted by [`run`].
pub const COMMANDS: [&str; 6] = ["stats", "lemma1", "mi", "parse-agreement", "e2e", "pad-model"];

pub fn run(command: &str, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match command {
        "stats" => cmd_stats(cfg),
        "lemma1" => cmd_lemma1(cfg),
        "mi" => cmd_mi(cfg),
        "parse-agreement" => cmd_parse_agreement(cfg),
        "e2e" => cmd_e2e(cfg),
        "pad-model" => cmd_pad_model(cfg),
        other => Err(CliError::Config(format!(
            "unknown command {other:?}; expected one of {}",
            COMMANDS.join(", ")
        ))),
    }
}
