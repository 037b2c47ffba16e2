use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    NonConvergence(String),

    #[error("{0}")]
    Model(#[from] rydberg_zeno::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit status.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NonConvergence(_) => 2,
            CliError::Config(_) | CliError::Model(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
