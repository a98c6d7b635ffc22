use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one command invocation. Output paths are relative to the
/// output directory; only the timestamps differ between repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seeds: Vec<u64>,
    pub inputs: Vec<String>,
    /// Every config in effect, field for field.
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

pub fn now() -> String {
    DateTime::<Utc>::from(SystemTime::now()).to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn begin(command: &str, inputs: &[&Path]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seeds: Vec::new(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config: serde_json::Value::Null,
            outputs: Vec::new(),
            started_at: now(),
            finished_at: String::new(),
        }
    }

    /// Records `paths`, stored relative to `out`.
    pub fn add_outputs(&mut self, out: &Path, paths: impl IntoIterator<Item = PathBuf>) {
        for p in paths {
            let rel = p.strip_prefix(out).unwrap_or(&p);
            self.outputs.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }

    /// Stamps the end time and writes `manifest.json` into `out`.
    pub fn finish(mut self, out: &Path) -> Result<PathBuf, CliError> {
        self.finished_at = now();
        let path = out.join(MANIFEST_FILE);
        write_json(&path, &self)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    /// Referenced outputs missing from `out`.
    pub fn missing_outputs(&self, out: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|p| !out.join(p).is_file())
            .cloned()
            .collect()
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}
