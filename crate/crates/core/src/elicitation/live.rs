//! HTTP client for an OpenAI-style text-completion endpoint.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, CompletionBackend};
use super::corpus::CompletionParams;

/// Bearer token for the live backend.
pub const API_KEY_ENV: &str = "FEATNORM_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    pub endpoint: String,
    pub timeout: Duration,
    /// Stop sequences sent with each request.
    pub stop: Vec<String>,
}

impl LiveConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        LiveConfig {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(60),
            stop: vec!["\nQ:".to_string()],
        }
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    api_key: String,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    stop: &'a [String],
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

impl LiveBackend {
    /// Reads the API key from `FEATNORM_API_KEY`.
    pub fn from_env(config: LiveConfig) -> Result<Self, BackendError> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| BackendError::MissingApiKey(API_KEY_ENV))?;
        Ok(Self::new(config, key))
    }

    pub fn new(config: LiveConfig, api_key: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        LiveBackend {
            config,
            api_key: api_key.into(),
            agent,
        }
    }
}

impl CompletionBackend for LiveBackend {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError> {
        let request = CompletionRequest {
            model: &params.model,
            prompt,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            stop: &self.config.stop,
        };
        let mut response = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&request)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body });
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&body).map_err(|e| BackendError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| BackendError::Malformed("no choices in response".into()))
    }
}
