use std::path::PathBuf;

use ids_polar::{ChannelError, GuardError, MiError, PadError, PolarError, TrellisError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Pad(#[from] PadError),
    #[error(transparent)]
    Mi(#[from] MiError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Trellis(#[from] TrellisError),
    #[error("output error: {0}")]
    Output(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
