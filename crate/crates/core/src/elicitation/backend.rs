use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use super::corpus::{CompletionParams, RawResponse};
use super::prompt::{prompt_hash, PromptTemplate};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no recorded completion for prompt {0}")]
    NotRecorded(String),
    #[error("environment variable {0} is not set")]
    MissingApiKey(&'static str),
}

impl BackendError {
    /// Transport failures, rate limiting and server errors are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// Anything that turns a prompt into a completion.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError>;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for &B {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

type ResponseFn = dyn Fn(&str) -> String + Send + Sync;

/// Deterministic backend for tests and dry runs.
pub struct StubBackend {
    respond: Box<ResponseFn>,
}

impl StubBackend {
    /// Always answers `text`.
    pub fn fixed(text: impl Into<String>) -> Self {
        let text = text.into();
        StubBackend {
            respond: Box::new(move |_| text.clone()),
        }
    }

    pub fn from_fn(f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        StubBackend { respond: Box::new(f) }
    }

    /// Answers by the concept name in the open question (as rendered by
    /// `template`), falling back to `fallback` for unknown names.
    pub fn keyed(template: PromptTemplate, answers: HashMap<String, String>, fallback: impl Into<String>) -> Self {
        let fallback = fallback.into();
        Self::from_fn(move |prompt| {
            template
                .extract_concept(prompt)
                .and_then(|name| answers.get(name))
                .unwrap_or(&fallback)
                .clone()
        })
    }
}

impl CompletionBackend for StubBackend {
    fn complete(&self, prompt: &str, _params: &CompletionParams) -> Result<String, BackendError> {
        Ok((self.respond)(prompt))
    }
}

/// Replays recorded completions by prompt hash.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    store: HashMap<String, String>,
}

impl ReplayBackend {
    /// Builds a store from recorded responses. Two recordings of the same
    /// prompt must agree byte for byte.
    pub fn from_responses<'a>(responses: impl IntoIterator<Item = &'a RawResponse>) -> Result<Self> {
        let mut store: HashMap<String, String> = HashMap::new();
        for r in responses {
            match store.get(&r.prompt_hash) {
                Some(existing) if existing != &r.completion => {
                    return Err(Error::argument(format!(
                        "conflicting recorded completions for prompt {}",
                        r.prompt_hash
                    )));
                }
                Some(_) => {}
                None => {
                    store.insert(r.prompt_hash.clone(), r.completion.clone());
                }
            }
        }
        Ok(ReplayBackend { store })
    }

    pub fn insert(&mut self, prompt: &str, completion: impl Into<String>) {
        self.store.insert(prompt_hash(prompt), completion.into());
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }
}

impl CompletionBackend for ReplayBackend {
    fn complete(&self, prompt: &str, _params: &CompletionParams) -> Result<String, BackendError> {
        let hash = prompt_hash(prompt);
        self.store.get(&hash).cloned().ok_or(BackendError::NotRecorded(hash))
    }
}

/// Memoizes successful completions by prompt hash. Concurrent requests for
/// the same prompt wait for the first one instead of calling the inner
/// backend again.
pub struct CachingBackend<B> {
    inner: B,
    cache: Mutex<HashMap<String, Arc<Mutex<Option<String>>>>>,
}

impl<B: CompletionBackend> CachingBackend<B> {
    pub fn new(inner: B) -> Self {
        CachingBackend {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached(&self) -> usize {
        let cache = self.cache.lock().unwrap();
        cache.values().filter(|slot| slot.lock().unwrap().is_some()).count()
    }
}

impl<B: CompletionBackend> CompletionBackend for CachingBackend<B> {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError> {
        let slot = {
            let mut cache = self.cache.lock().unwrap();
            cache.entry(prompt_hash(prompt)).or_default().clone()
        };
        let mut slot = slot.lock().unwrap();
        if let Some(text) = slot.as_ref() {
            return Ok(text.clone());
        }
        let text = self.inner.complete(prompt, params)?;
        *slot = Some(text.clone());
        Ok(text)
    }
}

/// Exponential backoff with multiplicative jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
    pub max_backoff: Duration,
    /// Relative jitter: the delay is scaled by a factor in `[1 - j, 1 + j)`.
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            initial_backoff: Duration::from_secs(1),
            multiplier: 2.0,
            max_backoff: Duration::from_secs(60),
            jitter: 0.2,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based), before jitter.
    pub fn base_delay(&self, retry: u32) -> Duration {
        let factor = self.multiplier.powi(retry.saturating_sub(1).min(30) as i32);
        self.initial_backoff.mul_f64(factor).min(self.max_backoff)
    }
}

type Sleeper = dyn Fn(Duration) + Send + Sync;

pub struct RetryingBackend<B> {
    inner: B,
    policy: RetryPolicy,
    sleep: Box<Sleeper>,
    jitter_rng: Mutex<ChaCha20Rng>,
}

impl<B: CompletionBackend> RetryingBackend<B> {
    pub fn new(inner: B, policy: RetryPolicy, seed: u64) -> Self {
        Self::with_sleeper(inner, policy, seed, std::thread::sleep)
    }

    pub fn with_sleeper(
        inner: B,
        policy: RetryPolicy,
        seed: u64,
        sleep: impl Fn(Duration) + Send + Sync + 'static,
    ) -> Self {
        RetryingBackend {
            inner,
            policy,
            sleep: Box::new(sleep),
            jitter_rng: Mutex::new(rng::substream(seed, "retry-jitter")),
        }
    }

    fn delay(&self, retry: u32) -> Duration {
        let base = self.policy.base_delay(retry);
        let j = self.policy.jitter;
        if j <= 0.0 {
            return base;
        }
        let u: f64 = self.jitter_rng.lock().unwrap().random();
        base.mul_f64(1.0 - j + 2.0 * j * u)
    }
}

impl<B: CompletionBackend> CompletionBackend for RetryingBackend<B> {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError> {
        let mut attempt = 1;
        loop {
            match self.inner.complete(prompt, params) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < self.policy.max_attempts => {
                    log::warn!("attempt {attempt} failed: {e}; retrying");
                    (self.sleep)(self.delay(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Spaces requests at least `60 / requests_per_minute` seconds apart.
pub struct RateLimitedBackend<B> {
    inner: B,
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl<B: CompletionBackend> RateLimitedBackend<B> {
    pub fn new(inner: B, requests_per_minute: f64) -> Result<Self> {
        if !requests_per_minute.is_finite() || requests_per_minute <= 0.0 {
            return Err(Error::argument("requests per minute must be positive"));
        }
        Ok(RateLimitedBackend {
            inner,
            interval: Duration::from_secs_f64(60.0 / requests_per_minute),
            next_slot: Mutex::new(None),
        })
    }

    fn acquire(&self) {
        let wait = {
            let mut next = self.next_slot.lock().unwrap();
            let now = Instant::now();
            let slot = match *next {
                Some(t) if t > now => t,
                _ => now,
            };
            *next = Some(slot + self.interval);
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

impl<B: CompletionBackend> CompletionBackend for RateLimitedBackend<B> {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, BackendError> {
        self.acquire();
        self.inner.complete(prompt, params)
    }
}
