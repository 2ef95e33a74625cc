//! Run manifest: what ran, with which seeds, and checksums of what it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Method, Network};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerSeeds {
    pub method: Method,
    pub network: Network,
    pub h: usize,
    pub m: usize,
    pub training: u64,
    pub rounding: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChecksum {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub workers: Vec<WorkerSeeds>,
    pub wall_clock_seconds: f64,
    pub complete: bool,
    pub error: Option<String>,
    pub files: Vec<FileChecksum>,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, workers: Vec<WorkerSeeds>) -> Self {
        RunManifest {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            wall_clock_seconds: 0.0,
            complete: false,
            error: None,
            files: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Files whose current contents no longer match the recorded checksum.
    pub fn changed_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for f in &self.files {
            if sha256_hex(&fs::read(dir.join(&f.path))?) != f.sha256 {
                out.push(f.path.clone());
            }
        }
        Ok(out)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Checksums of `files`, recorded relative to `dir`.
pub fn checksum_files(dir: &Path, files: &[PathBuf]) -> Result<Vec<FileChecksum>> {
    files
        .iter()
        .map(|p| {
            let bytes = fs::read(p)?;
            let path = p.strip_prefix(dir).unwrap_or(p).to_path_buf();
            Ok(FileChecksum { path, sha256: sha256_hex(&bytes) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn round_trip_and_change_detection() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.csv");
        fs::write(&f, "x\n1\n").unwrap();
        let mut m = RunManifest::new(&ExperimentConfig::default(), vec![]);
        m.files = checksum_files(dir.path(), &[f.clone()]).unwrap();
        assert_eq!(m.files[0].path, PathBuf::from("a.csv"));
        m.write(&dir.path().join("manifest.json")).unwrap();
        let back = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(back, m);
        assert!(back.changed_files(dir.path()).unwrap().is_empty());
        fs::write(&f, "x\n2\n").unwrap();
        assert_eq!(back.changed_files(dir.path()).unwrap(), vec![PathBuf::from("a.csv")]);
    }
}
