//! Output staging. A run builds every artifact in memory and writes them in
//! one step at the end, so a failed computation leaves nothing behind. If a
//! write fails midway, the files already written are removed again.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

pub const MANIFEST_NAME: &str = "run_manifest.json";
/// Bumped whenever an output layout changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut buf = Vec::new();
        gaitlevels_core::report::write_json(&mut buf, value)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes all staged files into `dir`, creating it if needed.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let created = !dir.exists();
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory `{}`", dir.display()))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
                if created {
                    let _ = fs::remove_dir(dir);
                }
                return Err(e).with_context(|| format!("cannot write `{}`", path.display()));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Record of one run. Contains no timestamps or host details, so repeating
/// a run reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub format_version: u32,
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, outputs: Vec<String>) -> Self {
        RunManifest {
            tool: "gaitlevels".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format_version: FORMAT_VERSION,
            config: config.clone(),
            outputs,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read manifest `{}`", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("`{}` is not a valid run manifest", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested");
        let mut a = Artifacts::default();
        a.add("x.txt", b"1".to_vec());
        a.add("y.txt", b"2".to_vec());
        a.commit(&out).unwrap();
        assert_eq!(fs::read(out.join("y.txt")).unwrap(), b"2");
    }

    #[test]
    fn failed_commit_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let mut a = Artifacts::default();
        a.add("ok.txt", b"1".to_vec());
        a.add("missing/sub.txt", b"2".to_vec());
        assert!(a.commit(&out).is_err());
        assert!(!out.exists());
    }
}
