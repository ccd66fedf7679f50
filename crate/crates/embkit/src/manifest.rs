//! Run manifests: what was run, with which flags, seeds and inputs. Written
//! as `running` before the work starts and rewritten when it ends.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

pub fn digest(path: &Path) -> Result<FileDigest> {
    let mut file = File::open(path).with_context(|| format!("{}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).with_context(|| format!("{}", path.display()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(FileDigest {
        path: path.to_owned(),
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub seeds: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Unix seconds.
    pub started: f64,
    pub finished: Option<f64>,
    pub status: &'static str,
    pub error: Option<String>,
    #[serde(skip)]
    location: PathBuf,
}

impl RunManifest {
    pub fn begin(
        location: PathBuf,
        subcommand: &str,
        flags: &impl Serialize,
        seeds: serde_json::Value,
        inputs: &[&Path],
    ) -> Result<Self> {
        let m = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_owned(),
            argv: std::env::args().collect(),
            flags: serde_json::to_value(flags)?,
            seeds,
            inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
            outputs: Vec::new(),
            started: now(),
            finished: None,
            status: "running",
            error: None,
            location,
        };
        m.write()?;
        Ok(m)
    }

    fn write(&self) -> Result<()> {
        if let Some(dir) = self.location.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&self.location, text + "\n")
            .with_context(|| format!("writing manifest {}", self.location.display()))
    }

    pub fn finish<T>(mut self, outcome: &Result<T>, outputs: &[PathBuf]) -> Result<()> {
        self.finished = Some(now());
        match outcome {
            Ok(_) => {
                self.status = "ok";
                self.outputs = outputs
                    .iter()
                    .filter(|p| p.is_file())
                    .map(|p| digest(p))
                    .collect::<Result<_>>()?;
            }
            Err(e) => {
                self.status = "failed";
                self.error = Some(format!("{e:#}"));
            }
        }
        self.write()
    }
}
