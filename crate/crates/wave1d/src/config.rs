//! Line-oriented `key = value` configuration files with `[section]` headers.
//!
//! ```text
//! # comment
//! [experiment]
//! name = fig-u2ux
//!
//! [mesh]
//! intervals = 400
//! steps = 240
//! ```
//!
//! Numbers may be written as decimals (`0.01`, `0.5e-7`) or small rationals
//! (`1/6`). The parsed file echoes back deterministically, which is what the
//! run manifests embed.

use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

/// Parse a decimal or `p/q` rational literal.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad number `{s}`")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad number `{s}`")))?;
        if d == 0.0 {
            return Err(Error::Config(format!("zero denominator in `{s}`")));
        }
        Ok(n / d)
    } else {
        s.parse()
            .map_err(|_| Error::Config(format!("bad number `{s}`")))
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}` in section `[{current}]`",
                    lineno + 1
                )));
            }
        }
        Ok(ConfigFile { sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        Self::parse_str(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.to_string());
    }

    pub fn string(&self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key).unwrap_or(default).to_string()
    }

    pub fn number(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            Some(v) => parse_number(v),
            None => Ok(default),
        }
    }

    pub fn integer(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad integer `{v}` for {section}.{key}"))),
            None => Ok(default),
        }
    }

    /// Comma-separated list of numbers.
    pub fn number_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    let item = item.trim();
                    if !item.is_empty() {
                        out.push(parse_number(item)?);
                    }
                }
                Ok(Some(out))
            }
        }
    }

    /// Deterministic `[section]\nkey = value` dump.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            if !name.is_empty() {
                out.push_str(&format!("[{name}]\n"));
            }
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}
