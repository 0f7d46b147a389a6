//! Artifact directory with a manifest of content hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub struct Bundle {
    root: PathBuf,
    /// Relative path → SHA-256 of the bytes written.
    artifacts: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'a str,
    config_sha256: String,
    seed: u64,
    threads: usize,
    wall_time_seconds: f64,
    artifacts: &'a BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Bundle {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(io_error(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_error(parent))?;
        }
        std::fs::write(&path, bytes).map_err(io_error(&path))?;
        self.artifacts.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Writes `manifest.json`, which is excluded from its own artifact list.
    pub fn finish(self, command: &str, config: &[u8], seed: u64, wall_time_seconds: f64) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: "divlab",
            version: env!("CARGO_PKG_VERSION"),
            core_version: divlab_core::VERSION,
            command,
            config_sha256: sha256_hex(config),
            seed,
            threads: rayon::current_num_threads(),
            wall_time_seconds,
            artifacts: &self.artifacts,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.root.join("manifest.json");
        std::fs::write(&path, text).map_err(io_error(&path))
    }
}
