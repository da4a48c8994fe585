//! Plain `key = value` configuration files and step-list parsing.

use crate::{config_err, CliResult};
use std::collections::BTreeMap;

const KEYS: [&str; 16] = [
    "scheme",
    "scheme-file",
    "h-list",
    "t-end",
    "kappa",
    "epsilon",
    "reference-scheme",
    "reference-h",
    "lossless",
    "format",
    "out",
    "problem",
    "max-steps",
    "h0",
    "config",
    "threads",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// `#` starts a comment; keys may use `-` or `_`.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("config line {}: expected key = value", idx + 1)))?;
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(config_err(format!("config line {}: unknown key `{}`", idx + 1, k.trim())));
            }
            if key == "config" || key == "threads" {
                return Err(config_err(format!(
                    "config line {}: `{key}` cannot be set from a config file",
                    idx + 1
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.values
            .get(key)
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }

    pub fn number(&self, key: &str) -> CliResult<Option<f64>> {
        self.values
            .get(key)
            .map(|v| v.parse::<f64>().map_err(|_| config_err(format!("{key}: cannot parse `{v}` as a number"))))
            .transpose()
    }

    pub fn numbers(&self, key: &str) -> CliResult<Vec<f64>> {
        self.list(key)
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| config_err(format!("{key}: cannot parse `{v}` as a number"))))
            .collect()
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.values.get(key).map(String::as_str) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(config_err(format!("{key}: expected true or false, got `{v}`"))),
        }
    }
}

/// `1/16`, `0.0625` or `2^-4`.
pub fn parse_step(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let bad = || config_err(format!("cannot parse step size `{s}`"));
    let h = if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad())?;
        let den: f64 = den.trim().parse().map_err(|_| bad())?;
        num / den
    } else if let Some(exp) = s.strip_prefix("2^") {
        2f64.powi(exp.trim().parse::<i32>().map_err(|_| bad())?)
    } else {
        s.parse().map_err(|_| bad())?
    };
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(config_err(format!("step size `{s}` must be positive")))
    }
}

pub fn parse_h_list(s: &str) -> CliResult<Vec<f64>> {
    let hs = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_step)
        .collect::<CliResult<Vec<_>>>()?;
    if hs.is_empty() {
        return Err(config_err("empty step list"));
    }
    Ok(hs)
}
