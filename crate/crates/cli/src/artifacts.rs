//! In-memory outputs and their all-or-nothing commit to disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

/// Manifest file name; its lines follow the `sha256sum` format.
pub const MANIFEST_NAME: &str = "manifest.sha256";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self::new(name, text.into_bytes())
    }

    pub fn digest(&self) -> String {
        hex_digest(&self.bytes)
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Files written by one run, with their SHA-256 digests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub directory: PathBuf,
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn render(&self) -> String {
        self.entries.iter().map(|(name, digest)| format!("{digest}  {name}\n")).collect()
    }

    /// Re-hash every listed file; returns the names whose digest differs.
    pub fn verify(&self) -> io::Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, digest) in &self.entries {
            let bytes = fs::read(self.directory.join(name))?;
            if hex_digest(&bytes) != *digest {
                bad.push(name.clone());
            }
        }
        Ok(bad)
    }

    pub fn parse(directory: &Path, text: &str) -> CliResult<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_once("  ")
                    .map(|(d, n)| (n.to_string(), d.to_string()))
                    .ok_or_else(|| CliError::Io(format!("malformed manifest line `{l}`")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Self {
            directory: directory.to_path_buf(),
            entries,
        })
    }
}

/// Fail before any computation if the output directory cannot be used or
/// would have files replaced without permission.
pub fn check_destination(dir: &Path, names: &[String], force: bool) -> CliResult<()> {
    if dir.exists() && !dir.is_dir() {
        return Err(CliError::Config(format!("output path {} is not a directory", dir.display())));
    }
    if let Some(parent) = dir.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.exists() {
            return Err(CliError::Config(format!(
                "parent of the output directory {} does not exist",
                dir.display()
            )));
        }
    }
    if force {
        return Ok(());
    }
    let clashes: Vec<&str> = names
        .iter()
        .map(String::as_str)
        .chain([MANIFEST_NAME])
        .filter(|n| dir.join(n).exists())
        .collect();
    if !clashes.is_empty() {
        return Err(CliError::Config(format!(
            "{} already contains {}; pass --force-overwrite to replace",
            dir.display(),
            clashes.join(", ")
        )));
    }
    Ok(())
}

/// Write every artifact into a staging directory next to the target, then
/// move the files into place. On failure the staging directory is removed
/// and the target is left as it was before the move began.
pub fn commit(dir: &Path, artifacts: Vec<Artifact>, force: bool) -> CliResult<Manifest> {
    check_destination(dir, &artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(), force)?;
    let io = |what: &str, path: &Path, e: io::Error| CliError::Io(format!("{what} {}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
    let staging = dir.join(format!(".staging-{}", std::process::id()));
    fs::create_dir_all(&staging).map_err(|e| io("cannot create", &staging, e))?;

    let result = (|| {
        let mut entries = Vec::with_capacity(artifacts.len());
        for a in &artifacts {
            let path = staging.join(&a.name);
            fs::write(&path, &a.bytes).map_err(|e| io("cannot write", &path, e))?;
            entries.push((a.name.clone(), a.digest()));
        }
        let manifest = Manifest {
            directory: dir.to_path_buf(),
            entries,
        };
        let path = staging.join(MANIFEST_NAME);
        fs::write(&path, manifest.render()).map_err(|e| io("cannot write", &path, e))?;
        for name in artifacts.iter().map(|a| a.name.as_str()).chain([MANIFEST_NAME]) {
            let (from, to) = (staging.join(name), dir.join(name));
            fs::rename(&from, &to).map_err(|e| io("cannot move into place", &to, e))?;
        }
        Ok(manifest)
    })();
    let _ = fs::remove_dir_all(&staging);
    result
}
