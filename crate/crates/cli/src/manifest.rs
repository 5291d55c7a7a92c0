//! Run manifests.
//!
//! Every artifact directory gets a `manifest.toml` recording what produced
//! it: the command, code version, seed, iteration budget, the scenario path
//! plus a SHA-256 of its exact bytes, and the fully resolved agent
//! configuration. Re-running the binary with the recorded inputs reproduces
//! the directory byte for byte (timing column aside).

use std::fs;
use std::path::Path;

use gridrl_core::ddpg::AgentConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub code_version: &'a str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_clock: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resume: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuation: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<String>>,
    pub scenario: ScenarioStamp,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<&'a AgentConfig>,
}

impl<'a> Manifest<'a> {
    /// Baseline fields shared by every command; callers fill in the rest.
    pub fn new(command: &'a str, seed: u64, scenario: ScenarioStamp) -> Manifest<'a> {
        Manifest {
            command,
            code_version: env!("CARGO_PKG_VERSION"),
            seed,
            iterations: None,
            episodes: None,
            checkpoint_every: None,
            fixed_clock: None,
            resume: None,
            continuation: None,
            grid: None,
            scenario,
            agent: None,
        }
    }
}

#[derive(Clone, Serialize)]
pub struct ScenarioStamp {
    pub path: String,
    pub sha256: String,
}

impl ScenarioStamp {
    pub fn new(path: &Path, contents: &str) -> ScenarioStamp {
        ScenarioStamp {
            path: path.display().to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Serialise and write atomically (temp file + rename), so a crash can
/// never leave a half-written manifest behind.
pub fn write_manifest(dir: &Path, manifest: &Manifest) -> CliResult<()> {
    let text = toml::to_string_pretty(manifest)
        .map_err(|e| CliError::runtime(format!("serialising manifest: {e}")))?;
    let target = dir.join(MANIFEST_NAME);
    let tmp = dir.join(".manifest.toml.tmp");
    fs::write(&tmp, text).map_err(CliError::io(format!("writing {}", tmp.display())))?;
    fs::rename(&tmp, &target)
        .map_err(CliError::io(format!("renaming manifest into {}", dir.display())))?;
    Ok(())
}
