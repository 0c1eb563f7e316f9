//! Run manifests: enough context next to every output set to reproduce it.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// The invocation, argv joined by spaces.
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Fully resolved configuration snapshot; re-running the tool with these
    /// values reproduces the outputs byte for byte.
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: String, config: serde_json::Value) -> Self {
        Self {
            tool: "coexfair",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            config,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> io::Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let body = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&path, body + "\n")?;
    Ok(path)
}
