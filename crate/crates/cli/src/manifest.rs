//! Run manifests: everything needed to reproduce a command's artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use eglf_core::dataset::ScalingSpec;
use eglf_core::simulators::Problem;
use serde::{Deserialize, Serialize};

use crate::error::{Context, Result};

pub const TOOL: &str = concat!("eglf ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Fully resolved options; passing the manifest as `--config` replays the run.
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSpec>,
    pub artifacts: BTreeMap<String, PathBuf>,
    pub results: serde_json::Value,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Self {
        Self {
            tool: TOOL.to_string(),
            command: command.to_string(),
            problem: None,
            seed: None,
            config: serde_json::to_value(config).expect("options serialize to JSON"),
            scaling: None,
            artifacts: BTreeMap::new(),
            results: serde_json::Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn artifact(mut self, name: &str, path: &Path) -> Self {
        self.artifacts.insert(name.to_string(), path.to_path_buf());
        self
    }

    pub fn results(mut self, results: &impl Serialize) -> Self {
        self.results = serde_json::to_value(results).expect("results serialize to JSON");
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).in_file(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).in_file(path)?;
        serde_json::from_str(&text).in_file(path)
    }
}

/// `data.csv` -> `data.manifest.json`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("manifest.json")
}
