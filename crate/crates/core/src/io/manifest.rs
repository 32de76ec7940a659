use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Record of one tool invocation, written beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    /// SHA-256 over the input file contents and the configuration.
    pub config_digest: String,
    pub tool_version: String,
    pub wall_time_ms: u64,
    pub outputs: Vec<PathBuf>,
}

/// Digest of input contents (in order) and `config`. Paths do not enter the
/// digest, so copies of the same inputs digest alike.
pub fn config_digest(command: &str, inputs: &[PathBuf], config: &Value) -> io::Result<String> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    for p in inputs {
        let bytes = std::fs::read(p)?;
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    h.update(serde_json::to_vec(config).expect("JSON value serializes"));
    Ok(hex::encode(h.finalize()))
}

/// `dir/name.ext` becomes `dir/name.ext.manifest.json`.
pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary_output.with_file_name(name)
}
