//! Run manifest: every artifact in an output directory with its sha256.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory, '/'-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    pub config_hash: Option<String>,
    pub started_at: String,
    pub finished_at: String,
    pub artifacts: Vec<Artifact>,
    pub versions: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else if path.strip_prefix(root).map(|p| p != Path::new(MANIFEST_FILE)).unwrap_or(false) {
            out.push(path);
        }
    }
    Ok(())
}

/// All files below `dir` except the manifest itself, sorted by path.
pub fn collect_artifacts(dir: &Path) -> CliResult<Vec<Artifact>> {
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let bytes = fs::read(&f)?;
        let rel = f.strip_prefix(dir).unwrap().components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        out.push(Artifact { path: rel, sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

pub fn versions() -> BTreeMap<String, String> {
    let v = env!("CARGO_PKG_VERSION").to_string();
    ["blowuplab-core", "blowuplab-meshsim", "blowuplab-cli"].iter().map(|n| (n.to_string(), v.clone())).collect()
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn write_manifest(dir: &Path, command: &str, config_hash: Option<String>, started_at: String) -> CliResult<RunManifest> {
    let m = RunManifest {
        command: command.to_string(),
        config_hash,
        started_at,
        finished_at: now(),
        artifacts: collect_artifacts(dir)?,
        versions: versions(),
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&m)?)?;
    Ok(m)
}

pub fn read_manifest(dir: &Path) -> CliResult<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
}

/// Artifacts whose current hash differs from the manifest, or that are missing.
pub fn verify(dir: &Path) -> CliResult<Vec<String>> {
    let m = read_manifest(dir)?;
    let mut bad = Vec::new();
    for a in &m.artifacts {
        match fs::read(dir.join(&a.path)) {
            Ok(b) if sha256_hex(&b) == a.sha256 => {}
            _ => bad.push(a.path.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
