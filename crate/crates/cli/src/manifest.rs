use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub toolkit_version: &'static str,
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, config_path: Option<&Path>, output_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash,
            config_path: config_path.map(Path::to_path_buf),
            output_dir: output_dir.to_path_buf(),
            artifacts: Vec::new(),
            toolkit_version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    /// Writes `manifest-<command>.json` next to the artifacts and returns its path.
    pub fn write(&self) -> Result<PathBuf> {
        for a in &self.artifacts {
            if !a.exists() {
                return Err(CliError::Usage(format!("artifact {} was not written", a.display())));
            }
        }
        let path = self.output_dir.join(format!("manifest-{}.json", self.command));
        write_json(&path, self)?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
