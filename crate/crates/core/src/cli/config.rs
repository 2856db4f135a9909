//! Flat `key = value` run configuration, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub(crate) struct Settings {
    values: BTreeMap<String, String>,
    base: Option<PathBuf>,
}

pub(crate) fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut values = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('_', "-");
        if values.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("config line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(values)
}

impl Settings {
    pub(crate) fn load(path: Option<&Path>, command: &str, allowed: &[&str]) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings { values: BTreeMap::new(), base: None });
        };
        let values = parse_config(&std::fs::read_to_string(path)?)?;
        if let Some(c) = values.get("command") {
            if c != command {
                return Err(Error::Parse(format!("config is for `{c}`, not `{command}`")));
            }
        }
        if let Some(k) = values.keys().find(|k| *k != "command" && !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown config key `{k}` for `{command}`")));
        }
        Ok(Settings {
            values,
            base: path.parent().map(Path::to_path_buf),
        })
    }

    /// The flag if given, else the config entry.
    pub(crate) fn get(&self, key: &str, flag: &Option<String>) -> Option<String> {
        flag.clone().or_else(|| self.values.get(key).cloned())
    }

    /// Like [`Settings::get`], resolving config paths against the config's directory.
    pub(crate) fn path(&self, key: &str, flag: &Option<String>) -> Option<PathBuf> {
        if let Some(f) = flag {
            return Some(PathBuf::from(f));
        }
        let v = self.values.get(key)?;
        Some(match &self.base {
            Some(b) if Path::new(v).is_relative() => b.join(v),
            _ => PathBuf::from(v),
        })
    }

    pub(crate) fn parse<T: std::str::FromStr>(&self, key: &str, flag: &Option<String>) -> Result<Option<T>> {
        self.get(key, flag)
            .map(|v| v.parse::<T>().map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`"))))
            .transpose()
    }

    pub(crate) fn require<T: std::str::FromStr>(&self, key: &str, flag: &Option<String>) -> Result<T> {
        self.parse(key, flag)?.ok_or_else(|| Error::Parse(format!("missing `{key}`")))
    }
}

pub(crate) fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{t}`"))))
        .collect()
}

/// `a..b` (inclusive) or a comma list.
pub(crate) fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| Error::Parse(format!("seeds `{text}`")))?;
        let b: u64 = b.trim().parse().map_err(|_| Error::Parse(format!("seeds `{text}`")))?;
        if a > b {
            return Err(Error::Parse(format!("empty seed range `{text}`")));
        }
        return Ok((a..=b).collect());
    }
    parse_list("seeds", text)
}
