use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: &str = "agora-manifest/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub scenario: String,
    pub scenario_sha256: String,
    /// Hash of the scenario after includes are resolved, so an edited
    /// catalog also counts as a different scenario.
    pub resolved_sha256: String,
    pub seed: u64,
    pub ticks: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(
        scenario: &Path,
        scenario_bytes: &[u8],
        resolved: &str,
        seed: u64,
        ticks: u64,
        outputs: Vec<String>,
    ) -> Self {
        RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            scenario: scenario.display().to_string(),
            scenario_sha256: sha256_hex(scenario_bytes),
            resolved_sha256: sha256_hex(resolved.as_bytes()),
            seed,
            ticks,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs,
        }
    }

    pub fn read(dir: &Path) -> Result<Option<RunManifest>, CliError> {
        let path = dir.join(MANIFEST_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| CliError::domain(format!("{}: unreadable manifest: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }

    /// Writes to a sibling temp file and renames it into place, so a reader
    /// never sees a half-written manifest.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        f.write_all(text.as_bytes()).map_err(|e| CliError::io(&tmp, e))?;
        f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
