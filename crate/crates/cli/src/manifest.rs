//! Run manifest: configuration hash, seed, input and output digests,
//! exclusions and warnings.

use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn digest_file(role: &str, path: &Path) -> Result<FileDigest> {
    let mut file = std::fs::File::open(path)
        .with_context(|| format!("manifest: cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        bytes += n as u64;
        hasher.update(&buf[..n]);
    }
    Ok(FileDigest {
        role: role.to_string(),
        path: path.display().to_string(),
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Exclusion {
    pub stage: String,
    pub item: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: &'static str,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub created_at: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub exclusions: Vec<Exclusion>,
    pub warnings: Vec<String>,
    pub notes: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            tool: "festcircuit",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            seed: config.seed,
            config_hash: config.hash(),
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            exclusions: Vec::new(),
            warnings: Vec::new(),
            notes: serde_json::Map::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::output::write_json(&dir.join(MANIFEST_FILE), &serde_json::to_value(self)?)
    }
}
