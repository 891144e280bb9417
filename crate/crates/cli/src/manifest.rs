use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct WallClock {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

/// Everything needed to rerun a command and get the same bytes back.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    /// `sha256:<hex>` of the spec file as read, if there was one.
    pub spec_digest: Option<String>,
    pub seed: Option<u64>,
    pub grids: BTreeMap<String, Vec<f64>>,
    pub outputs: Vec<String>,
    pub tool_version: &'static str,
    pub wall_clock: WallClock,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}

/// Collects manifest fields while a command runs.
pub struct Recorder {
    started: SystemTime,
    clock: Instant,
    pub spec_digest: Option<String>,
    pub seed: Option<u64>,
    pub grids: BTreeMap<String, Vec<f64>>,
}

impl Recorder {
    pub fn start() -> Self {
        Self {
            started: SystemTime::now(),
            clock: Instant::now(),
            spec_digest: None,
            seed: None,
            grids: BTreeMap::new(),
        }
    }

    pub fn grid(&mut self, name: &str, values: &[f64]) {
        self.grids.insert(name.to_string(), values.to_vec());
    }

    /// Writes `content` to `path` and its manifest to `path.manifest.json`.
    pub fn write(&mut self, path: &Path, content: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        let manifest = self.manifest(vec![path.to_path_buf()]);
        let manifest_path = manifest_path(path);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(&manifest_path, text).with_context(|| format!("writing {}", manifest_path.display()))?;
        Ok(())
    }

    fn manifest(&self, outputs: Vec<PathBuf>) -> RunManifest {
        let started_unix_s = self
            .started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        RunManifest {
            command: std::env::args().collect(),
            spec_digest: self.spec_digest.clone(),
            seed: self.seed,
            grids: self.grids.clone(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_clock: WallClock {
                started_unix_s,
                elapsed_s: self.clock.elapsed().as_secs_f64(),
            },
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
