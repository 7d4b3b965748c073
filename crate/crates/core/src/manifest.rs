//! Run manifests: a JSON record of what produced each output file.
//!
//! Every command writes `run_manifest.json` next to its outputs with the
//! full invocation, the master seed, and a SHA-256 digest of each file, so
//! a run can be audited and replayed exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OutputDigest {
    /// File name relative to the output directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Full argument vector of the invocation.
    pub argv: Vec<String>,
    pub master_seed: Option<u64>,
    pub threads: usize,
    pub wall_ms: u128,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: impl Into<String>, argv: Vec<String>) -> Self {
        RunManifest {
            tool: "rlp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            argv,
            master_seed: None,
            threads: 0,
            wall_ms: 0,
            outputs: Vec::new(),
        }
    }

    /// Digest `files` (sorted by name for a stable manifest) and record them.
    pub fn record_outputs(&mut self, dir: &Path, files: &[PathBuf]) -> Result<()> {
        let mut outputs = Vec::with_capacity(files.len());
        for f in files {
            let name = f
                .strip_prefix(dir)
                .unwrap_or(f)
                .to_string_lossy()
                .into_owned();
            outputs.push(OutputDigest {
                file: name,
                sha256: sha256_file(f)?,
            });
        }
        outputs.sort_by(|a, b| a.file.cmp(&b.file));
        self.outputs = outputs;
        Ok(())
    }

    /// Serialize to `run_manifest.json` inside `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}
