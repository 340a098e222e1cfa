use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Config;
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// What one completed stage produced, and from what.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of the stage name, its parameters and its inputs' hashes.
    pub fingerprint: String,
    pub params: serde_json::Value,
    /// Input artifact → sha256, as consumed.
    pub inputs: BTreeMap<String, String>,
    /// Output artifact (relative to the root) → sha256.
    pub outputs: BTreeMap<String, String>,
    /// Dimensions and diagnostics for humans.
    #[serde(default)]
    pub info: serde_json::Value,
    pub completed_unix: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub config: Config,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn new(config: Config) -> Self {
        Self {
            version: MANIFEST_VERSION,
            config,
            stages: BTreeMap::new(),
        }
    }

    pub fn load(root: &Path) -> Result<Option<Self>> {
        let path = root.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let m: Manifest = serde_json::from_slice(&std::fs::read(&path)?)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Artifact {
                path,
                msg: format!("manifest version {}", m.version),
            });
        }
        Ok(Some(m))
    }

    pub fn save(&self, root: &Path) -> Result<()> {
        let text = serde_json::to_vec_pretty(self)?;
        write_atomic(&root.join(MANIFEST_FILE), &text)
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads `root/name` and checks it against the recorded hash.
pub fn read_verified(root: &Path, name: &str, expected: &str) -> Result<Vec<u8>> {
    let path = root.join(name);
    let bytes = std::fs::read(&path).map_err(|e| Error::Artifact {
        path: path.clone(),
        msg: e.to_string(),
    })?;
    let found = sha256_hex(&bytes);
    if found != expected {
        return Err(Error::HashMismatch {
            path,
            expected: expected.to_string(),
            found,
        });
    }
    Ok(bytes)
}
