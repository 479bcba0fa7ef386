//! Flag, config-file and default resolution.
//!
//! The config file is flat `key = value` text whose keys are long flag names
//! (`pca-k` and `pca_k` are the same key). A flag given on the command line
//! wins over the file, and the file wins over the built-in default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use structural_confidence::config::parse_key_values;
use structural_confidence::{Error, Result};

/// Every key a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "input",
    "output",
    "features",
    "model",
    "scores",
    "labels",
    "report",
    "export",
    "dataset",
    "variant",
    "mode",
    "window",
    "stride",
    "pca_k",
    "projector",
    "projector_out",
    "bins",
    "seed",
    "n_trees",
    "learning_rate",
    "max_leaves",
    "min_samples_leaf",
    "l2_leaf",
    "reps",
];

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let file = parse_key_values(text)?;
        if let Some(key) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!("config: unknown key {key:?}")));
        }
        Ok(Settings { file })
    }

    /// The flag value, else the parsed config value, else `None`.
    pub fn optional<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::InvalidArgument(format!("config key {key}: {e}"))),
        }
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.optional(flag, key)?.unwrap_or(default))
    }

    pub fn required<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.optional(flag, key)?
            .ok_or_else(|| Error::InvalidArgument(format!("--{} is required", key.replace('_', "-"))))
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.required(flag, key)
    }
}
