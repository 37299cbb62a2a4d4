//! Collecting raw feature lists from a text-completion model.
//!
//! Each run primes the model with a fixed set of question/answer examples
//! taken from a human norm and then asks the open question for every
//! concept. The priming prefix never changes within a run: every answer is
//! captured and discarded before the next concept is asked.

mod backend;
mod corpus;
mod live;
mod prompt;
mod run;

pub use backend::{
    BackendError, CachingBackend, CompletionBackend, RateLimitedBackend, ReplayBackend, RetryPolicy, RetryingBackend,
    StubBackend,
};
pub use corpus::{
    parse_jsonl, read_corpus, run_file_name, to_jsonl, write_partial_run, write_run, CompletionParams, RawResponse,
    SamplingParams,
};
pub use live::{LiveBackend, LiveConfig, API_KEY_ENV};
pub use prompt::{build_prompt, prompt_hash, PrimingExample, PromptTemplate};
pub use run::{elicit_norm, elicit_norm_to_dir, elicit_run, plan_runs, RunOptions, RunSpec};
