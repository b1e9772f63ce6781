use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: Option<String>,
}

/// Provenance record written once into every output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the effective configuration JSON below.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputRecord>,
    pub tool_version: String,
    pub timestamp: String,
    pub config: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        seed: Option<u64>,
        inputs: &[&Path],
    ) -> CliResult<Self> {
        let config = serde_json::to_value(config)?;
        let config_hash = sha256_hex(serde_json::to_string(&config)?.as_bytes());
        let inputs = inputs
            .iter()
            .map(|p| InputRecord {
                path: p.to_path_buf(),
                sha256: std::fs::read(p).ok().map(|b| sha256_hex(&b)),
            })
            .collect();
        Ok(Self {
            command: command.to_string(),
            config_hash,
            seed,
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
        })
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        Ok(())
    }
}
