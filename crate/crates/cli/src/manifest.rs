//! Sidecar manifests written next to every output file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use polyknot::io::Real;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub version: String,
    pub duration_seconds: Real,
}

pub fn hash_file(path: &Path) -> Result<InputHash> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputHash { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn new(args: &[String], seed: Option<u64>, inputs: &[&Path], elapsed: Duration) -> Result<Self> {
        Ok(RunManifest {
            subcommand: args.first().cloned().unwrap_or_default(),
            args: args.to_vec(),
            seed,
            inputs: inputs.iter().map(|p| hash_file(p)).collect::<Result<_>>()?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: Real(elapsed.as_secs_f64()),
        })
    }

    pub fn write_beside(&self, out: &Path) -> Result<()> {
        let path = sidecar_path(out);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
