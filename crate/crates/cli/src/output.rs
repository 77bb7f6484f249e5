//! Atomic output files and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "run-manifest.json";

/// Files produced by one scenario, kept in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        debug_assert!(!name.contains('/') && !name.contains('\\'));
        self.files.push((name.to_string(), bytes));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.add(name, to_json_bytes(value));
    }

    pub fn files(&self) -> &[(String, Vec<u8>)] {
        &self.files
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

/// Pretty JSON with a trailing newline; floats use the shortest round-trip form.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output values serialize");
    bytes.push(b'\n');
    bytes
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    let io = |what: &str, p: &Path, e: std::io::Error| CliError::Io(format!("{what} {}: {e}", p.display()));
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| io("cannot create", &tmp, e))?;
    f.write_all(bytes).map_err(|e| io("cannot write", &tmp, e))?;
    f.sync_all().map_err(|e| io("cannot sync", &tmp, e))?;
    drop(f);
    fs::rename(&tmp, &target).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io("cannot rename into", &target, e)
    })?;
    Ok(target)
}

/// Inputs recorded in the manifest.
pub struct ManifestInfo<'a> {
    pub kind: &'a str,
    pub config_path: Option<&'a Path>,
    pub config_text: &'a str,
    pub resolved_config: &'a Value,
    pub wall_time_seconds: f64,
}

/// Writes every output, then the manifest. Returns the written paths.
pub fn commit(dir: &Path, outputs: &Outputs, info: &ManifestInfo<'_>) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut listing = Vec::new();
    for (name, bytes) in outputs.files() {
        written.push(write_atomic(dir, name, bytes)?);
        listing.push(json!({"file": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes)}));
    }
    let manifest = json!({
        "tool": "weakly-coupled",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": weakly_coupled::VERSION,
        "kind": info.kind,
        "config_path": info.config_path.map(|p| p.display().to_string()),
        "config_sha256": sha256_hex(info.config_text.as_bytes()),
        "resolved_config": info.resolved_config,
        "outputs": listing,
        "wall_time_seconds": info.wall_time_seconds,
    });
    written.push(write_atomic(dir, MANIFEST, &to_json_bytes(&manifest))?);
    Ok(written)
}
