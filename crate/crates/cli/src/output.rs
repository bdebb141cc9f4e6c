//! Artifact writing and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under one output directory and records their checksums.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    records: Vec<ArtifactRecord>,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            action: "create",
            path: dir.clone(),
            source,
        })?;
        Ok(Self { dir, records: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| CliError::Io {
                action: "create",
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, bytes).map_err(|source| CliError::Io {
            action: "write",
            path,
            source,
        })?;
        self.records.push(ArtifactRecord {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(empowerment::Error::from)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn records(&self) -> &[ArtifactRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ArtifactRecord> {
        self.records
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub empowerment: String,
    pub empower_cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            empowerment: empowerment::VERSION.to_string(),
            empower_cli: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Written last as `manifest.json`. Only `wall_clock_seconds` varies
/// between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    /// The config after command-line overrides, with every default filled in.
    pub config: RunConfig,
    pub versions: Versions,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<ArtifactRecord>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    /// Checks that every listed artifact exists with the recorded checksum.
    pub fn verify_artifacts(&self, dir: &Path) -> Result<()> {
        for r in &self.artifacts {
            let path = dir.join(&r.path);
            let bytes = fs::read(&path).map_err(|source| CliError::Io {
                action: "read",
                path: path.clone(),
                source,
            })?;
            if sha256_hex(&bytes) != r.sha256 {
                return Err(CliError::Io {
                    action: "verify",
                    path,
                    source: std::io::Error::other("checksum mismatch"),
                });
            }
        }
        Ok(())
    }
}
