//! The run manifest: everything needed to reproduce a run byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    /// Fully resolved configuration, defaults included.
    pub config: serde_json::Value,
    /// SHA-256 of every input file.
    pub input_digests: BTreeMap<String, String>,
    /// Artifact files written by this run, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Extra command-specific records (per-cell checksums, summaries).
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            seed,
            config,
            input_digests: BTreeMap::new(),
            artifacts: Vec::new(),
            extra: serde_json::Value::Null,
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn record_artifact(&mut self, name: &str) {
        self.artifacts.push(name.to_string());
    }

    /// Writes `manifest.json` into the output directory and returns its path.
    pub fn write(mut self, out_dir: &Path) -> Result<PathBuf> {
        self.artifacts.push("manifest.json".to_string());
        let path = out_dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Config(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&path, body + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    Ok(out)
}

/// Creates the output directory (parents included) if needed.
pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes a text artifact and registers it in the manifest.
pub fn write_artifact(
    manifest: &mut RunManifest,
    out_dir: &Path,
    name: &str,
    contents: &str,
) -> Result<PathBuf> {
    let path = out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    manifest.record_artifact(name);
    Ok(path)
}
