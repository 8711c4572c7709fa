use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command: arguments, input digests, seed and
/// kernel spec.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_spec: Option<serde_json::Value>,
    pub inputs: Vec<InputHash>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub threads: usize,
    pub software_version: String,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str, threads: usize) -> Self {
        Self {
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            kernel_spec: None,
            inputs: Vec::new(),
            seed: None,
            threads,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            duration_seconds: 0.0,
            extra: serde_json::Map::new(),
            started: Some(Instant::now()),
        }
    }

    /// Records the digest of a file, or of every file in a directory.
    pub fn hash_input(&mut self, path: &Path) -> Result<(), CliError> {
        let mut files: Vec<PathBuf> = if path.is_dir() {
            fs::read_dir(path)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?
        } else {
            vec![path.to_path_buf()]
        };
        files.sort();
        for file in files.into_iter().filter(|f| f.is_file()) {
            let digest = Sha256::digest(fs::read(&file)?);
            self.inputs.push(InputHash { path: file.display().to_string(), sha256: hex::encode(digest) });
        }
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(mut self, path: &Path) -> Result<(), CliError> {
        if let Some(t) = self.started {
            self.duration_seconds = t.elapsed().as_secs_f64();
        }
        let mut bytes = serde_json::to_vec_pretty(&self).map_err(geotree_kernels::Error::from)?;
        bytes.push(b'\n');
        fs::write(path, bytes)?;
        Ok(())
    }
}

/// `<file>.manifest.json` next to an output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
