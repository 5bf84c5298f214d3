//! Run provenance. Every command resolves its flags and input digests into a
//! manifest; JSON reports embed the deterministic part, and a timestamped
//! copy lands beside each artifact as `<artifact>.manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::formats::write_atomic;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Resolved flag values, keyed by flag name.
    pub flags: BTreeMap<String, String>,
    /// Every seed the run consumed, in flag order.
    pub seeds: Vec<u64>,
    /// SHA-256 of each input file.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    /// Only present in the sidecar copy; outputs stay byte-deterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            flags: BTreeMap::new(),
            seeds: Vec::new(),
            inputs: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: None,
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.insert(name.to_string(), value.to_string());
        self
    }

    pub fn flag_opt(self, name: &str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.flag(name, v),
            None => self,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seeds.push(seed);
        self
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("digesting input {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(self)
    }

    /// Writes the timestamped sidecar next to `artifact`.
    pub fn write_sidecar(&self, artifact: &Path) -> Result<()> {
        let mut stamped = self.clone();
        stamped.timestamp = Some(chrono::Utc::now().to_rfc3339());
        let sidecar = sidecar_path(artifact);
        let body = serde_json::to_string_pretty(&stamped)?;
        write_atomic(&sidecar, &(body + "\n"))
    }
}

pub fn sidecar_path(artifact: &Path) -> std::path::PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}
