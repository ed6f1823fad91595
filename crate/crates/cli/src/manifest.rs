use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub flag: String,
    pub path: String,
    /// SHA-256 of the canonical serialization of the parsed input.
    pub sha256: String,
}

impl InputDigest {
    pub fn of<T: Serialize>(flag: &str, path: &Path, value: &T) -> Self {
        let canonical = ncfun::json::to_canonical_string(value).expect("inputs serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        Self {
            flag: flag.to_string(),
            path: path.display().to_string(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, flags: Value, seed: Option<u64>, inputs: Vec<InputDigest>, wall: Duration) -> Self {
        Self {
            command: command.to_string(),
            flags,
            seed,
            version: ncfun::VERSION.to_string(),
            inputs,
            wall_time_seconds: wall.as_secs_f64(),
        }
    }

    pub fn to_canonical(&self) -> String {
        ncfun::json::to_canonical_string(self).expect("manifest serializes")
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

/// `<path>.manifest.json`.
pub fn beside(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}
