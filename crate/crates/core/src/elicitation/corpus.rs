//! Raw corpus files: JSON Lines, one response per line, one file per run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::io::{read_to_string, write_string};

/// Model and sampling parameters sent with every request. There are no
/// defaults: callers must state what they used.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl CompletionParams {
    pub fn new(model: impl Into<String>, temperature: f64, max_tokens: u32) -> Self {
        CompletionParams {
            model: model.into(),
            temperature,
            max_tokens,
        }
    }

    pub fn sampling(&self) -> SamplingParams {
        SamplingParams {
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

/// The `params` object recorded with each response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub concept_id: String,
    pub run_id: u32,
    /// SHA-256 of the full prompt text, hex encoded.
    pub prompt_hash: String,
    pub completion: String,
    pub model: String,
    pub params: SamplingParams,
}

pub fn to_jsonl(responses: &[RawResponse]) -> String {
    let mut out = String::new();
    for r in responses {
        out.push_str(&serde_json::to_string(r).expect("raw response serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str, source_name: &str) -> Result<Vec<RawResponse>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| serde_json::from_str(line).map_err(|e| Error::parse(source_name, i + 1, e.to_string())))
        .collect()
}

pub fn run_file_name(run_id: u32) -> String {
    format!("run_{run_id}.jsonl")
}

pub fn write_run(dir: &Path, run_id: u32, responses: &[RawResponse]) -> Result<PathBuf> {
    let path = dir.join(run_file_name(run_id));
    write_string(&path, &to_jsonl(responses))?;
    Ok(path)
}

/// Responses of an aborted run go to `run_{id}.partial.jsonl`, which
/// [`read_corpus`] ignores.
pub fn write_partial_run(dir: &Path, run_id: u32, responses: &[RawResponse]) -> Result<PathBuf> {
    let path = dir.join(format!("run_{run_id}.partial.jsonl"));
    write_string(&path, &to_jsonl(responses))?;
    Ok(path)
}

/// Reads a single JSONL file, or every `run_{id}.jsonl` in a directory in run
/// order.
pub fn read_corpus(path: &Path) -> Result<Vec<RawResponse>> {
    if path.is_file() {
        return parse_jsonl(&read_to_string(path)?, &path.display().to_string());
    }
    let mut runs: Vec<(u32, PathBuf)> = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let entry = entry.map_err(|e| Error::io(path, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(id) = name
            .strip_prefix("run_")
            .and_then(|s| s.strip_suffix(".jsonl"))
            .and_then(|s| s.parse::<u32>().ok())
        {
            runs.push((id, entry.path()));
        }
    }
    runs.sort();
    let mut out = Vec::new();
    for (_, p) in runs {
        out.extend(parse_jsonl(&read_to_string(&p)?, &p.display().to_string())?);
    }
    Ok(out)
}
