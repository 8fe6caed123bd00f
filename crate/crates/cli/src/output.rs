//! Artifact writer. Every file carries the config hash and seed; the manifest
//! lists the files with their digests and is the only place with wall-clock data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub kind: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub cli_version: String,
    pub core_version: String,
    pub files: Vec<FileEntry>,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest, CliError> {
        let text = std::fs::read_to_string(dir.join("manifest.json")).map_err(io)?;
        serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("bad manifest: {e}")))
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("I/O error: {e}"))
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    seed: u64,
    files: Vec<FileEntry>,
    started: Instant,
}

impl Artifacts {
    pub fn new(dir: &Path, hash: &str, seed: u64) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(io)?;
        Ok(Artifacts { dir: dir.to_path_buf(), hash: hash.into(), seed, files: vec![], started: Instant::now() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), bytes).map_err(io)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.into(), sha256: digest(bytes) });
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut s = format!("# config_hash={}\n# seed={}\n{}\n", self.hash, self.seed, header.join(","));
        for r in rows {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.write(name, s.as_bytes())
    }

    /// Writes `value` with `config_hash` and `seed` added at the top level.
    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        let obj = match v.as_object_mut() {
            Some(o) => o,
            None => return Err(CliError::Runtime("summary must be a JSON object".into())),
        };
        obj.insert("config_hash".into(), self.hash.clone().into());
        obj.insert("seed".into(), self.seed.into());
        let text = serde_json::to_string_pretty(&v).unwrap() + "\n";
        self.write(name, text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("<!-- config_hash={} seed={} -->\n{body}", self.hash, self.seed);
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, command: &str, kind: Option<&str>) -> Result<Manifest, CliError> {
        let m = Manifest {
            command: command.into(),
            kind: kind.map(Into::into),
            config_hash: self.hash,
            seed: self.seed,
            cli_version: env!("CARGO_PKG_VERSION").into(),
            core_version: weightflow::VERSION.into(),
            files: self.files,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&m).unwrap() + "\n";
        std::fs::write(self.dir.join("manifest.json"), text).map_err(io)?;
        Ok(m)
    }
}
