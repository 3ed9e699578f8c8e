use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] eglf_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: eglf_core::Error },
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) trait Context<T> {
    fn in_file(self, path: &Path) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, std::io::Error> {
    fn in_file(self, path: &Path) -> Result<T> {
        self.map_err(|source| CliError::Io { path: path.into(), source })
    }
}

impl<T> Context<T> for std::result::Result<T, serde_json::Error> {
    fn in_file(self, path: &Path) -> Result<T> {
        self.map_err(|source| CliError::Json { path: path.into(), source })
    }
}

impl<T> Context<T> for std::result::Result<T, eglf_core::Error> {
    fn in_file(self, path: &Path) -> Result<T> {
        self.map_err(|source| CliError::File { path: path.into(), source })
    }
}
