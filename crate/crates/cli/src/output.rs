use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{LinkageArg, MetricArg, ModeArg, RetentionArg, ScoreArg};
use crate::CliError;

/// The resolved options of a run, echoed into every artifact. Thread count is
/// deliberately absent: it never changes the output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub output_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retention: Option<RetentionArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linkage: Option<LinkageArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub permute_labels: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub log: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    /// SHA-256 of the raw input bytes (CSV, or spec file for `simulate`).
    pub input_digest: String,
}

impl Provenance {
    pub fn new(config: RunConfig, input_digest: String) -> Self {
        Provenance {
            tool: "treelet",
            version: env!("CARGO_PKG_VERSION"),
            config,
            input_digest,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn path_string(p: &Path) -> String {
    p.display().to_string()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Files collected in memory and written only once the whole command has
/// succeeded, each through a temp file and rename.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |e: std::io::Error| CliError::Data(format!("writing to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(&bytes).map_err(io)?;
            tmp.flush().map_err(io)?;
            let target = dir.join(&name);
            tmp.persist(&target).map_err(|e| io(e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}
