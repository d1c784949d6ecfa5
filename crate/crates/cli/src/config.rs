//! Flat `key = value` config files with optional `[subcommand]` sections.
//!
//! Keys outside any section apply to every subcommand; keys inside
//! `[analyze]`, `[path]`, ... apply only to that one and win over global
//! keys. Command-line flags win over both.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path, section: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, section)
    }

    pub fn parse(text: &str, section: &str) -> Result<Self, CliError> {
        let mut global = BTreeMap::new();
        let mut scoped = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(name.trim().to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("config line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            match current.as_deref() {
                None => {
                    global.insert(key, value);
                }
                Some(s) if s == section => {
                    scoped.insert(key, value);
                }
                Some(_) => {}
            }
        }
        global.extend(scoped);
        Ok(ConfigFile { values: global })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the config value, parsed with `FromStr`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key '{key}': {e}"))),
        }
    }
}

/// Parses `k1=v1,k2=v2` into ordered pairs.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("'{}' is not a number", v.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}
