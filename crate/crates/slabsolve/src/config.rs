//! Flat key-value experiment configuration.
//!
//! One scalar per line, `key = value`, `#` comments, no nesting. The same
//! text round-trips through [`ExperimentConfig::emit`] byte for byte, which
//! is what makes result files reproducible from their config echo.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub experiment: String,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            values: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        let experiment = values.remove("experiment").ok_or_else(|| {
            Error::Config("config needs an `experiment = <name>` line".into())
        })?;
        Ok(ExperimentConfig { experiment, values })
    }

    /// Canonical text form: `experiment` first, then sorted keys.
    pub fn emit(&self) -> String {
        let mut out = format!("experiment = {}\n", self.experiment);
        for (k, v) in &self.values {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Reject keys outside the experiment's vocabulary before any compute.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key `{key}` for experiment `{}` (allowed: {})",
                    self.experiment,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not a number"))),
        }
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not an integer"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not an integer"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.values.get(key).map(String::as_str) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(Error::Config(format!(
                "key `{key}`: `{v}` is not true/false"
            ))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map(String::as_str).unwrap_or(default)
    }

    /// Comma-separated list of integers, e.g. `dims = 2,3,5`.
    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|part| {
                    part.trim().parse().map_err(|_| {
                        Error::Config(format!("key `{key}`: `{part}` is not an integer"))
                    })
                })
                .collect(),
        }
    }
}

/// FNV-1a hash of the canonical config text; stamped into plot-file headers
/// so data files can be traced back to their exact inputs.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in config.emit().as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
