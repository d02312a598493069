use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::args::Format;
use super::output::write_atomic;
use super::CliError;
use crate::experiments::SCHEMA_VERSION;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";
pub const UNITS_DIR: &str = "units";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pending,
    Done,
    Failed,
}

/// Bookkeeping for one run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub run_id: String,
    pub experiment: String,
    /// SHA-256 of the compact JSON serialization of the config.
    pub config_hash: String,
    pub schema_version: u32,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub wall_clock_seconds: Option<f64>,
    pub status: Status,
    /// Output format, reused on resume.
    pub format: Format,
    /// Status of each unit, in unit order.
    pub units: Vec<Status>,
    /// Output files relative to the run directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(run_id: &str, experiment: &str, config_hash: &str, format: Format, units: usize) -> Self {
        Self {
            run_id: run_id.to_string(),
            experiment: experiment.to_string(),
            config_hash: config_hash.to_string(),
            schema_version: SCHEMA_VERSION,
            started_unix: now_unix(),
            finished_unix: None,
            wall_clock_seconds: None,
            status: Status::Pending,
            format,
            units: vec![Status::Pending; units],
            outputs: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("corrupted manifest {}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "manifest {} has schema version {}, expected {SCHEMA_VERSION}",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn done_units(&self) -> usize {
        self.units.iter().filter(|s| **s == Status::Done).count()
    }
}

pub fn unit_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(UNITS_DIR).join(format!("{index}.json"))
}

pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            config_hash("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trips() {
        let mut m = RunManifest::new("r", "tail", "00", Format::Csv, 3);
        m.units[1] = Status::Done;
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
        assert_eq!(m.done_units(), 1);
    }
}
