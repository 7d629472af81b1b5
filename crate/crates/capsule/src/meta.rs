//! Metadata sidecars: every artifact `x` is accompanied by `x.meta.json`
//! naming the command, the configuration hash and the seeds that produced it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{RunConfig, Seeds};
use crate::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seeds: Seeds,
    /// Command-specific facts such as the controller or trial count.
    #[serde(default)]
    pub extra: BTreeMap<String, Value>,
}

impl Metadata {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Metadata {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash(),
            seeds: cfg.seeds,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }

    pub fn write_for(&self, artifact: &Path) -> Result<()> {
        write_json(&sidecar_path(artifact), self)
    }

    pub fn read_for(artifact: &Path) -> Result<Self> {
        let path = sidecar_path(artifact);
        let text = std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::format(&path, e))
    }
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    artifact.with_file_name(name)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::format(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}
