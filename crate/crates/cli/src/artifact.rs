use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tool version, configuration hash and seed stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        let json = serde_json::to_vec(config).expect("config serializes");
        Self {
            tool: "rolemodel".into(),
            version: VERSION.into(),
            config_sha256: sha256_hex(&json),
            seed: config.seed,
        }
    }

    /// `table,row,column,value` rows for long-format CSV artifacts.
    pub fn csv_rows(&self) -> String {
        format!(
            "meta,provenance,version,{}\nmeta,provenance,config_sha256,{}\nmeta,provenance,seed,{}\n",
            self.version, self.config_sha256, self.seed
        )
    }

    pub fn dot_comment(&self) -> String {
        format!(
            "// {} {} config_sha256={} seed={}\n",
            self.tool, self.version, self.config_sha256, self.seed
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A JSON artifact: provenance next to its payload.
#[derive(Debug, Serialize)]
pub struct Envelope<T> {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Failure::internal(format!("{}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, body: &T) -> Result<(), Failure> {
    let envelope = Envelope {
        provenance: provenance.clone(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&envelope).map_err(|e| Failure::internal(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Reads a JSON file that may or may not carry a provenance envelope.
pub fn read_json_payload<T: DeserializeOwned>(path: &Path, field: &str) -> Result<T, Failure> {
    let text = read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let payload = match value.get(field) {
        Some(inner) if value.get("provenance").is_some() => inner.clone(),
        _ => value,
    };
    serde_json::from_value(payload).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}
