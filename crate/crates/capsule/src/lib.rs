//! File formats, configuration, parallel drivers and the command pipeline
//! around `capsule-core`.

#![forbid(unsafe_code)]

pub use capsule_core as core;

pub mod commands;
pub mod config;
pub mod io;
pub mod meta;
pub mod model_file;
pub mod parallel;
pub mod plot;

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("missing {path} (run `capsule {stage}` first)")]
    Missing { path: PathBuf, stage: &'static str },
    #[error(transparent)]
    Core(#[from] capsule_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, reason: impl ToString) -> Self {
        AppError::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
