//! Merging of JSON config files and command-line flags.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::io::read_json;
use crate::montecarlo::ExperimentConfig;

/// Level used for the Gaussian experiments of `verify-all`.
pub const DEFAULT_GAUSSIAN_J_MAX: u32 = 14;

/// Keys accepted in addition to the fields of [`ExperimentConfig`].
const EXTRA_KEYS: &[&str] = &["gaussian_j_max"];

/// Key-value settings from an optional config file, overridden by flags.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: Map<String, Value>,
}

impl Settings {
    pub fn load(config: Option<&Path>) -> Result<Self> {
        let Some(path) = config else {
            return Ok(Settings::default());
        };
        let value: Value =
            read_json(path).map_err(|e| Error::setting("config", format!("cannot read {}: {e}", path.display())))?;
        match value {
            Value::Object(values) => Ok(Settings { values }),
            _ => Err(Error::setting("config", "must contain a JSON object")),
        }
    }

    /// Sets `key` when the flag was given; flags win over the file.
    pub fn set<T: Serialize>(&mut self, key: &str, flag: Option<T>) -> Result<()> {
        if let Some(v) = flag {
            let v = serde_json::to_value(v).map_err(|e| Error::setting(key, e.to_string()))?;
            self.values.insert(key.to_owned(), v);
        }
        Ok(())
    }

    pub fn set_default<T: Serialize>(&mut self, key: &str, value: T) -> Result<()> {
        if !self.values.contains_key(key) {
            self.set(key, Some(value))?;
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn extra<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| serde_json::from_value(v.clone()).map_err(|e| Error::setting(key, e.to_string())))
            .transpose()
    }

    pub fn gaussian_j_max(&self) -> Result<u32> {
        Ok(self.extra("gaussian_j_max")?.unwrap_or(DEFAULT_GAUSSIAN_J_MAX))
    }

    /// Builds the experiment config, reporting the first bad key by name.
    /// Range checks are left to the caller.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut known = Map::new();
        for (key, value) in &self.values {
            if EXTRA_KEYS.contains(&key.as_str()) {
                continue;
            }
            let single = Value::Object(Map::from_iter([(key.clone(), value.clone())]));
            serde_json::from_value::<ExperimentConfig>(single).map_err(|e| {
                let msg = e.to_string();
                if msg.starts_with("unknown field") {
                    Error::setting(key.as_str(), "unknown setting")
                } else {
                    Error::setting(key.as_str(), msg)
                }
            })?;
            known.insert(key.clone(), value.clone());
        }
        Ok(serde_json::from_value(Value::Object(known))?)
    }
}
