//! Atomic output files and the per-run manifest.

use anyhow::Context;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects outputs of one run and writes each one via temp file + rename.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<(String, String, usize)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: vec![],
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        atomic_write(&self.dir.join(name), bytes)?;
        self.written.push((name.to_string(), sha256_hex(bytes), bytes.len()));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &Value) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json`: resolved config, its hash, seed, version and
    /// the hash of every output written so far.
    pub fn finish(self, command: &str, config: &Value, seed: Option<u64>) -> anyhow::Result<()> {
        let config_text = serde_json::to_string(config)?;
        let outputs: Vec<Value> = self
            .written
            .iter()
            .map(|(f, h, n)| json!({"file": f, "sha256": h, "bytes": n}))
            .collect();
        let manifest = json!({
            "command": command,
            "config": config,
            "config_sha256": sha256_hex(config_text.as_bytes()),
            "seed": seed,
            "fracmax_version": env!("CARGO_PKG_VERSION"),
            "outputs": outputs,
        });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        atomic_write(&self.dir.join("manifest.json"), text.as_bytes())
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}
