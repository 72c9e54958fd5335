//! Output directories, record formats and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    /// Every setting the run used, as text; feed back with `--config`.
    pub config: BTreeMap<String, String>,
    /// Typed parameters of the underlying computation.
    pub parameters: serde_json::Value,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Collects the files of one run and writes the manifest last.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.files.retain(|f| f.file != name);
        self.files.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_jsonl<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<PathBuf, CliError> {
        self.write(name, &jsonl(records)?)
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        self.write(name, &csv_bytes(header, rows)?)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, CliError> {
        manifest.outputs = self.files;
        manifest.finished_at = timestamp();
        let path = self.root.join(MANIFEST);
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        Ok(manifest)
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn jsonl<T: Serialize>(records: &[T]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Shortest round-trip text of a float, as used in every CSV cell.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Recompute every digest listed in a manifest; returns the mismatches.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, CliError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Io(e.to_string()))?;
    let mut bad = Vec::new();
    for f in &m.outputs {
        let p = dir.join(&f.file);
        match fs::read(&p) {
            Ok(bytes) if sha256_hex(&bytes) == f.sha256 && bytes.len() as u64 == f.bytes => {}
            _ => bad.push(f.file.clone()),
        }
    }
    Ok(bad)
}
