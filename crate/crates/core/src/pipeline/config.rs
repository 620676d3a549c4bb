use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EngineError, FrameworkMode};
use crate::ledger::GasModel;

/// Default config file name inside the data root.
pub const CONFIG_FILE: &str = "provenance.toml";

/// Engine settings, read from a TOML file and overridden by CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub mode: FrameworkMode,
    pub namespace: String,
    pub ai_collection: String,
    pub human_collection: String,
    pub bind: String,
    pub seed: u64,
    pub gas: GasModel,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mode: FrameworkMode::Hybrid,
            namespace: "train".into(),
            ai_collection: "ai".into(),
            human_collection: "human".into(),
            bind: "127.0.0.1:8080".into(),
            seed: 0,
            gas: GasModel::default(),
        }
    }
}

impl EngineConfig {
    pub fn from_file(path: &Path) -> Result<Self, EngineError> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))
    }

    /// Loads `path` if given, else `<root>/provenance.toml` if present, else
    /// the defaults.
    pub fn load(root: &Path, path: Option<&Path>) -> Result<Self, EngineError> {
        match path {
            Some(p) => Self::from_file(p),
            None => {
                let default = root.join(CONFIG_FILE);
                if default.exists() {
                    Self::from_file(&default)
                } else {
                    Ok(Self::default())
                }
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "mode = \"vector_only\"\nseed = 9\n").unwrap();
        let c = EngineConfig::from_file(&path).unwrap();
        assert_eq!(c.mode, FrameworkMode::VectorOnly);
        assert_eq!(c.seed, 9);
        assert_eq!(c.namespace, "train");
        assert_eq!(c.gas, GasModel::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = EngineConfig::default();
        assert_eq!(toml::from_str::<EngineConfig>(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "colour = 3\n").unwrap();
        assert!(matches!(EngineConfig::from_file(&path), Err(EngineError::Config(_))));
    }
}
