use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one output directory.
///
/// `generated_at` is the only field that differs between runs on the same
/// inputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub input_digest: String,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub generated_at: String,
}

impl RunManifest {
    pub fn new(command: &str, inputs: &[PathBuf], config: BTreeMap<String, String>) -> std::io::Result<Self> {
        let mut combined = Sha256::new();
        let mut files = Vec::with_capacity(inputs.len());
        for path in inputs {
            let bytes = fs::read(path)?;
            let digest = hex::encode(Sha256::digest(&bytes));
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            combined.update(name.as_bytes());
            combined.update([0]);
            combined.update(digest.as_bytes());
            combined.update(b"\n");
            files.push(InputFile {
                path: path.display().to_string(),
                sha256: digest,
            });
        }
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            inputs: files,
            input_digest: hex::encode(combined.finalize()),
            config,
            outputs: Vec::new(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    /// Records output names relative to `dir`.
    pub fn with_outputs(mut self, dir: &Path, outputs: &[PathBuf]) -> Self {
        self.outputs = outputs
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect();
        self
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
