//! CSV writers and the per-run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::RunError;

/// Shortest round-trip representation, so identical inputs give identical bytes.
pub fn num(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    /// SHA-256 of the subcommand name and the resolved config text.
    pub input_hash: String,
    pub outputs: Vec<OutputFile>,
}

/// Collects the files written by one run.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(OutputFile {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| RunError::Io(std::io::Error::other(e));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
        self.put(name, &bytes)
    }

    /// Write `config.toml` (re-runnable as is) and `manifest.json`.
    pub fn finish<C: Serialize>(mut self, subcommand: &str, cfg: &C) -> Result<RunManifest, RunError> {
        let text = crate::config::to_toml(cfg)?;
        let input_hash = sha256_hex(format!("{subcommand}\n{text}").as_bytes());
        self.put("config.toml", text.as_bytes())?;
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(cfg).map_err(|e| RunError::Config(e.to_string()))?,
            input_hash,
            outputs: self.files,
        };
        let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Config(e.to_string()))?;
        json.push('\n');
        fs::write(self.dir.join("manifest.json"), json)?;
        Ok(manifest)
    }
}
