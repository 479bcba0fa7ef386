//! Flat `key = value` configuration files.
//!
//! One setting per line; blank lines and lines starting with `#` are
//! ignored. Keys use the long flag names with `-` or `_` (normalized to `_`).
//! Repeated keys are an error.

use std::collections::BTreeMap;

use crate::{Error, Result};

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!("config line {}: expected key = value", i + 1)));
        };
        let key = key.trim().replace('-', "_");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::InvalidArgument(format!("config line {}: invalid key {key:?}", i + 1)));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        if out.insert(key.clone(), value.to_string()).is_some() {
            return Err(Error::InvalidArgument(format!("config line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(out)
}
