use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{read_bytes, read_json, write_json, IoError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    /// File name only, so that manifests do not depend on where a run
    /// happened.
    pub name: String,
    pub sha256: String,
}

/// Provenance record written next to every output.
///
/// `hash` covers everything except `outputs` and `created_unix`, so two
/// runs with the same inputs, configuration and seed share a hash.
/// `lineage` lists the hashes of every manifest upstream of this run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputRecord>,
    pub config_path: Option<String>,
    pub config: serde_json::Value,
    pub conventions: BTreeMap<String, String>,
    pub lineage: Vec<String>,
    pub outputs: Vec<String>,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub created_unix: u64,
    pub hash: String,
}

#[derive(Serialize)]
struct Hashed<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: Option<u64>,
    inputs: &'a [InputRecord],
    config_path: &'a Option<String>,
    config: &'a serde_json::Value,
    conventions: &'a BTreeMap<String, String>,
    lineage: &'a [String],
}

pub fn sha256_file(path: &Path) -> Result<String, IoError> {
    Ok(hex::encode(Sha256::digest(read_bytes(path)?)))
}

/// `<output>.manifest.json`
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn now() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn new(tool: &str, version: &str, command: &str, seed: Option<u64>) -> Self {
        Self {
            tool: tool.into(),
            version: version.into(),
            command: command.into(),
            seed,
            inputs: Vec::new(),
            config_path: None,
            config: serde_json::Value::Null,
            conventions: BTreeMap::new(),
            lineage: Vec::new(),
            outputs: Vec::new(),
            created_unix: now(),
            hash: String::new(),
        }
    }

    /// Records an input by content hash and inherits the lineage of its
    /// sidecar manifest, if one exists.
    pub fn add_input(&mut self, role: &str, path: &Path) -> Result<(), IoError> {
        self.inputs.push(InputRecord {
            role: role.into(),
            name: file_name(path),
            sha256: sha256_file(path)?,
        });
        let side = sidecar_path(path);
        if side.exists() {
            let parent: RunManifest = read_json(&side)?;
            self.lineage.extend(parent.lineage_set());
        }
        Ok(())
    }

    pub fn set_config(&mut self, path: Option<&Path>, config: &impl Serialize) {
        self.config_path = path.map(file_name);
        self.config = serde_json::to_value(config).expect("serializable config");
    }

    pub fn convention(&mut self, key: &str, value: impl Into<String>) {
        self.conventions.insert(key.into(), value.into());
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(file_name(path));
    }

    /// Sorts the lineage and computes `hash`.
    pub fn finalize(&mut self) -> &str {
        let set: BTreeSet<String> = self.lineage.drain(..).collect();
        self.lineage = set.into_iter().collect();
        let view = Hashed {
            tool: &self.tool,
            version: &self.version,
            command: &self.command,
            seed: self.seed,
            inputs: &self.inputs,
            config_path: &self.config_path,
            config: &self.config,
            conventions: &self.conventions,
            lineage: &self.lineage,
        };
        let bytes = serde_json::to_vec(&view).expect("serializable");
        self.hash = hex::encode(Sha256::digest(bytes));
        &self.hash
    }

    /// This run's hash together with all upstream hashes.
    pub fn lineage_set(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.lineage.iter().cloned().collect();
        if !self.hash.is_empty() {
            s.insert(self.hash.clone());
        }
        s
    }

    pub fn write_sidecar(&self, output: &Path) -> Result<(), IoError> {
        write_json(&sidecar_path(output), self)
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_json(path)
    }
}
