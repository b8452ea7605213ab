//! Run manifests and atomic file output.
//!
//! Every artifact is written to a `.tmp` sibling and renamed into place, so
//! interrupted runs never leave truncated files that later runs would trust.
//! The manifest records the config hash, tool version, wall-clock stamps, and
//! a digest of every input and output file; `verify_digests` recomputes them.

use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write-then-rename in the target directory.
pub fn atomic_write(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

#[derive(Clone, Debug)]
pub struct RunManifest {
    pub command: String,
    /// CSV column-set version for this command's outputs.
    pub schema: u32,
    pub config_sha256: String,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<(PathBuf, String)>,
}

impl RunManifest {
    pub fn start(command: &str, config_text: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            schema: 1,
            config_sha256: sha256_hex(config_text.as_bytes()),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: now(),
            finished_unix: 0,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> io::Result<()> {
        let digest = sha256_hex(&fs::read(path)?);
        self.inputs.push((path.to_path_buf(), digest));
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> io::Result<()> {
        let digest = sha256_hex(&fs::read(path)?);
        self.outputs.push((path.to_path_buf(), digest));
        Ok(())
    }

    pub fn finish_and_write(mut self, path: &Path) -> io::Result<()> {
        self.finished_unix = now();
        atomic_write(path, &self.to_text())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command={}\n", self.command));
        s.push_str(&format!("schema={}\n", self.schema));
        s.push_str(&format!("config_sha256={}\n", self.config_sha256));
        s.push_str(&format!("version={}\n", self.version));
        s.push_str(&format!("started_unix={}\n", self.started_unix));
        s.push_str(&format!("finished_unix={}\n", self.finished_unix));
        for (p, d) in &self.inputs {
            s.push_str(&format!("input {} {}\n", p.display(), d));
        }
        for (p, d) in &self.outputs {
            s.push_str(&format!("output {} {}\n", p.display(), d));
        }
        s
    }
}

/// Recompute the digests named in a manifest file; true when all match.
pub fn verify_digests(manifest_path: &Path) -> io::Result<bool> {
    let text = fs::read_to_string(manifest_path)?;
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("input") | Some("output") => {
                let (Some(path), Some(digest)) = (parts.next(), parts.next()) else {
                    return Ok(false);
                };
                if sha256_hex(&fs::read(path)?) != digest {
                    return Ok(false);
                }
            }
            _ => {}
        }
    }
    Ok(true)
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// CSV body with a header row; cells must not contain commas or newlines
/// (vector-valued cells join their parts with `;`).
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        debug_assert!(row.iter().all(|c| !c.contains(',') && !c.contains('\n')));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
