//! One shared settings file feeds every command: line-oriented
//! `key=value`, UTF-8, `#` comments and blank lines ignored. Keys use the
//! long flag spellings; a flag given on the command line always wins over
//! the file. Commands read only the keys they understand, so one pipeline
//! file can drive a whole experiment.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

/// Every key any command understands. Unknown keys are rejected so typos
/// fail loudly instead of silently falling back to defaults.
const KNOWN_KEYS: &[&str] = &[
    "add-sentinels",
    "alpha",
    "annotations",
    "beta",
    "bundle",
    "corpus",
    "corpus-format",
    "epsilon",
    "format",
    "holdout",
    "input",
    "max-epochs",
    "model",
    "morph-ratio",
    "order",
    "out",
    "output",
    "ratios",
    "seed",
    "smoothing-k",
    "variant",
    "vocab-size",
];

pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            if !path.exists() {
                return Err(CliError::Validation(format!(
                    "config path {} does not exist",
                    path.display()
                )));
            }
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Io(format!("read config {}: {e}", path.display()))
            })?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(CliError::Validation(format!(
                        "config {} line {}: expected key=value, got {raw:?}",
                        path.display(),
                        i + 1
                    )));
                };
                let key = key.trim();
                let value = value.trim();
                if !KNOWN_KEYS.contains(&key) {
                    return Err(CliError::Validation(format!(
                        "config {} line {}: unknown key {key:?}",
                        path.display(),
                        i + 1
                    )));
                }
                if values.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(CliError::Validation(format!(
                        "config {} line {}: duplicate key {key:?}",
                        path.display(),
                        i + 1
                    )));
                }
            }
        }
        Ok(Settings { values })
    }

    /// Flag value if given, else the parsed config value, else None.
    pub fn merge<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                CliError::Validation(format!("config key {key}: bad value {raw:?}: {e}"))
            }),
        }
    }

    pub fn merge_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.merge(flag, key)?.unwrap_or(default))
    }

    /// As [`merge`](Self::merge), but the value must come from somewhere.
    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.merge(flag, key)?.ok_or_else(|| {
            CliError::Validation(format!("missing --{key} (no config value either)"))
        })
    }

    pub fn require_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
        self.require(flag, key)
    }

    /// Boolean flags cannot be "unset" on the command line, so a set flag
    /// wins and the config value is only consulted when the flag is absent.
    pub fn merge_flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.values.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(CliError::Validation(format!(
                "config key {key}: expected true or false, got {other:?}"
            ))),
        }
    }
}
