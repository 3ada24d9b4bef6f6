//! Run manifest: the resolved configuration, one entry per replica with a
//! content digest of its field file, and digests of every emitted report.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicaEntry {
    pub ordinal: u64,
    pub n: u32,
    pub seed_index: u32,
    /// Derived per-replica stream seed.
    pub seed: u64,
    pub field_path: Option<String>,
    pub sha256: Option<String>,
    pub walk_length: Option<u64>,
    pub covered: Option<bool>,
    /// Present when the replica failed; other fields may be absent.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub replicas: Vec<ReplicaEntry>,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            replicas: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn any_replica_failed(&self) -> bool {
        self.replicas.iter().any(|r| r.error.is_some())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
