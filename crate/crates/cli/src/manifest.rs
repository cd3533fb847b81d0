//! Run manifests and artifact bookkeeping.
//!
//! Every `run` writes a `manifest.json` next to its outputs: the exact
//! config it executed (so the run can be reproduced from the manifest
//! alone), a SHA-256 of that config, tool versions, wall time, and a digest
//! of every artifact written. Apart from the wall time, two runs of the
//! same config produce identical manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const MANIFEST_SCHEMA: &str = "cattrans-manifest/1";

/// Digest of one output file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ArtifactEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// The record written as `manifest.json` after a successful run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub cli_version: String,
    pub core_version: String,
    /// SHA-256 of the canonical (serialized) config.
    pub config_sha256: String,
    /// Wall-clock duration of the run in seconds (not reproducible).
    pub wall_time_s: f64,
    /// The full config, embedded so `run manifest.json` replays it.
    pub config: serde_json::Value,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Canonical config bytes for hashing: the typed struct serialized with its
/// declaration field order (maps in serde_json are sorted by key).
pub fn canonical_config_bytes(config: &ExperimentConfig) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(config)?)
}

/// Collects artifacts as they are written and assembles the manifest.
pub struct ArtifactSet {
    out_dir: PathBuf,
    entries: Vec<ArtifactEntry>,
}

impl ArtifactSet {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(ArtifactSet { out_dir: out_dir.to_path_buf(), entries: Vec::new() })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Write one artifact (relative path, forward slashes) and record its
    /// digest. Any parent directories are created.
    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        assert!(
            !rel.starts_with('/') && !rel.contains(".."),
            "artifact paths are relative to the output directory: {rel}"
        );
        let path = self.out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.entries.push(ArtifactEntry {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_string(&mut self, rel: &str, text: &str) -> Result<PathBuf> {
        self.write_bytes(rel, text.as_bytes())
    }

    /// Serialize a value as pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_string(rel, &text)
    }

    /// Finish the run: write `manifest.json` (itself not listed as an
    /// artifact) and return the manifest.
    pub fn finish(self, config: &ExperimentConfig, wall_time_s: f64) -> Result<(Manifest, PathBuf)> {
        let canonical = canonical_config_bytes(config)?;
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA.to_string(),
            cli_version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: cattrans_core::VERSION.to_string(),
            config_sha256: sha256_hex(&canonical),
            wall_time_s,
            config: serde_json::to_value(config)?,
            artifacts: self.entries,
        };
        let path = self.out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok((manifest, path))
    }
}

/// Verify that every artifact listed in a manifest exists under `dir` with
/// the recorded digest; returns the mismatching paths.
pub fn verify_artifacts(manifest: &Manifest, dir: &Path) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for entry in &manifest.artifacts {
        let path = dir.join(&entry.path);
        match fs::read(&path) {
            Ok(bytes) => {
                if sha256_hex(&bytes) != entry.sha256 {
                    bad.push(entry.path.clone());
                }
            }
            Err(_) => bad.push(entry.path.clone()),
        }
    }
    Ok(bad)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: not a manifest: {e}", path.display())))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, StabilizationConfig, CONFIG_SCHEMA};

    fn demo_config() -> ExperimentConfig {
        ExperimentConfig {
            schema: CONFIG_SCHEMA.to_string(),
            seed: 11,
            output_dir: None,
            experiment: Experiment::StabilizationStudy(StabilizationConfig {
                alpha_sq: 3.0,
                kappa1: 1.0,
                period: 0.125,
                n_rounds: 8,
                kappa_ratios: None,
                duties: None,
            }),
        }
    }

    #[test]
    fn sha256_matches_known_vector() {
        // SHA-256("abc") is a published test vector.
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trips_and_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = ArtifactSet::new(dir.path()).unwrap();
        set.write_string("a.csv", "x,y\n1,2\n").unwrap();
        set.write_json("b.json", &serde_json::json!({"k": 1})).unwrap();
        let config = demo_config();
        let (manifest, path) = set.finish(&config, 0.5).unwrap();

        let back = load_manifest(&path).unwrap();
        assert_eq!(back.schema, MANIFEST_SCHEMA);
        assert_eq!(back.artifacts, manifest.artifacts);
        assert_eq!(back.config_sha256, manifest.config_sha256);
        assert!(verify_artifacts(&back, dir.path()).unwrap().is_empty());

        // Corrupt one artifact: verification must name it.
        fs::write(dir.path().join("a.csv"), "tampered").unwrap();
        let bad = verify_artifacts(&back, dir.path()).unwrap();
        assert_eq!(bad, vec!["a.csv".to_string()]);
    }

    #[test]
    fn config_hash_is_stable_across_reserialization() {
        let config = demo_config();
        let h1 = sha256_hex(&canonical_config_bytes(&config).unwrap());
        let json = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        let h2 = sha256_hex(&canonical_config_bytes(&back).unwrap());
        assert_eq!(h1, h2);
    }
}
