//! Per-invocation settings: flags merged over the config file, plus input
//! loaders shared by the commands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context as _, Result};
use featnorm_core::ingestion::{parse_norm_file, NormMapping};
use featnorm_core::model::io::{read_norm, read_to_string, write_string};
use featnorm_core::{Concept, FeatureNorm};

use crate::config::Config;

/// Bad invocation: missing or malformed option, nonexistent input path.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub struct Ctx {
    pub command: &'static str,
    pub config: Config,
    pub seed: u64,
    pub out: PathBuf,
}

impl Ctx {
    pub fn new(command: &'static str, config: Config, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        let mut ctx = Ctx {
            command,
            config,
            seed: 0,
            out: PathBuf::new(),
        };
        ctx.seed = ctx.value(seed, "seed")?.unwrap_or(0);
        ctx.out = ctx.value(out, "out")?.unwrap_or_else(|| PathBuf::from("out"));
        Ok(ctx)
    }

    /// Flag value, else the config value parsed as `T`.
    pub fn value<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(self.command, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config value {key} = {raw:?} is invalid"))),
        }
    }

    pub fn required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.value(flag, key)?
            .ok_or_else(|| usage(format!("missing --{key} (or `{key}` in the config file)")))
    }

    /// Like [`required`](Self::required) for an input file that must exist.
    pub fn input(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        let path = self.required(flag, key)?;
        check_exists(&path)?;
        Ok(path)
    }

    pub fn optional_input(&self, flag: Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        let path = self.value(flag, key)?;
        if let Some(p) = &path {
            check_exists(p)?;
        }
        Ok(path)
    }

    /// Repeatable flag; the config holds a comma-separated list.
    pub fn list(&self, flag: Vec<String>, key: &str) -> Vec<String> {
        if !flag.is_empty() {
            return flag;
        }
        self.config
            .get(self.command, key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.output(name);
        write_string(&path, contents)?;
        Ok(path)
    }
}

fn check_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("{} does not exist", path.display())))
    }
}

/// A norm named on the command line as `[name=][preset:]path`.
pub struct NormSpec {
    pub name: String,
    pub preset: Option<String>,
    pub path: PathBuf,
}

impl NormSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = match spec.split_once('=') {
            Some((n, r)) if !n.is_empty() && !n.contains(['/', '\\']) => (Some(n.to_string()), r),
            _ => (None, spec),
        };
        let (preset, path) = match rest.split_once(':') {
            Some((p, path)) if NormMapping::preset(p).is_some() => (Some(p.to_lowercase()), path),
            _ => (None, rest),
        };
        let path = PathBuf::from(path);
        check_exists(&path)?;
        let name = name.or_else(|| preset.clone()).unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        Ok(NormSpec { name, preset, path })
    }

    pub fn load(&self) -> Result<FeatureNorm> {
        match &self.preset {
            None => Ok(read_norm(&self.path)?),
            Some(preset) => {
                let mapping = NormMapping::preset(preset).expect("checked in parse");
                let text = read_to_string(&self.path)?;
                let (norm, warnings) = parse_norm_file(&text, &self.path.display().to_string(), &mapping)?;
                for w in warnings {
                    log::warn!("{w}");
                }
                Ok(norm)
            }
        }
    }
}

pub fn load_concepts(path: &Path) -> Result<Vec<Concept>> {
    let text = read_to_string(path)?;
    featnorm_core::ingestion::parse_concepts(&text, &path.display().to_string())
        .with_context(|| format!("reading concepts {}", path.display()))
}
