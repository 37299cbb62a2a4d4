//! `key = value` configuration files with optional `[section]` headers.
//!
//! A key set inside `[filter]` applies to the `filter` command only; keys
//! before any header apply to every command. Command-line flags win over
//! both.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<(String, String), String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{source_name}:{}: expected `key = value`", i + 1);
            };
            let key = key.trim().replace('_', "-");
            if values
                .insert((section.clone(), key.clone()), value.trim().to_string())
                .is_some()
            {
                bail!("{source_name}:{}: `{key}` set twice", i + 1);
            }
        }
        Ok(Config { values })
    }

    /// Value for `key` as seen by `command`: its section first, then the
    /// top level.
    pub fn get(&self, command: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(command.to_string(), key.to_string()))
            .or_else(|| self.values.get(&(String::new(), key.to_string())))
            .map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_shadow_top_level() {
        let cfg = Config::parse("seed = 3\nk = 2\n[filter]\nk = auto # elbow\nk_max = 12\n", "c").unwrap();
        assert_eq!(cfg.get("filter", "k"), Some("auto"));
        assert_eq!(cfg.get("stats", "k"), Some("2"));
        assert_eq!(cfg.get("filter", "k-max"), Some("12"));
        assert_eq!(cfg.get("filter", "seed"), Some("3"));
        assert!(Config::parse("oops\n", "c").is_err());
        assert!(Config::parse("a = 1\na = 2\n", "c").is_err());
    }
}
