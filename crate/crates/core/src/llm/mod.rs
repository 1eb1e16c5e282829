// SPDX-License-Identifier: Apache-2.0

//! Language-model access: prompt assembly, a chat-completion client, replay
//! and synthetic mocks, retry policy and token metering.

mod extract;
mod mock;
pub mod prompts;
mod remote;
mod retry;
mod summarize;

use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::TokenUsage;

pub use extract::extract_code;
pub use mock::{prompt_hash, MockMode, ReplayFixture, ReplayMock, SyntheticMutator};
pub use remote::{LlmConfig, RemoteClient, DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT};
pub use retry::{complete_code, complete_parsed, complete_with_retry, CodeResponse, RetryPolicy};
pub use summarize::{LlmSummarizer, SUMMARY_MAX_WORDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    InitialCode,
    Refine,
    IdeaGen,
    Summary,
}

/// Where in the run a request was made. Not part of the prompt text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetInfo {
    pub node_index: usize,
    pub max_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
    pub purpose: Purpose,
    pub template_id: String,
    #[serde(default)]
    pub budget: BudgetInfo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    /// Network failure or a retryable HTTP status.
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    /// Any other non-success HTTP status.
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("model refused: {0}")]
    Refusal(String),
    #[error("no fixture for prompt {0}")]
    NoFixture(String),
    #[error("malformed model output: {0}")]
    Malformed(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl LlmError {
    pub fn is_transport(&self) -> bool {
        matches!(self, LlmError::Transport(_))
    }
}

pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError>;
}

/// One completed model call.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub seq: usize,
    pub purpose: Purpose,
    pub template_id: String,
    pub node_index: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Wraps a model and records the token usage of every successful call.
pub struct MeteredModel<M> {
    inner: M,
    records: Mutex<Vec<UsageRecord>>,
}

impl<M: LanguageModel> MeteredModel<M> {
    pub fn new(inner: M) -> Self {
        Self { inner, records: Mutex::new(Vec::new()) }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn records(&self) -> Vec<UsageRecord> {
        self.records.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn total(&self) -> TokenUsage {
        self.records().iter().map(|r| TokenUsage::new(r.prompt_tokens, r.completion_tokens)).sum()
    }
}

impl<M: LanguageModel> LanguageModel for MeteredModel<M> {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError> {
        let out = self.inner.complete(prompt)?;
        let mut recs = self.records.lock().unwrap_or_else(|e| e.into_inner());
        let seq = recs.len();
        recs.push(UsageRecord {
            seq,
            purpose: prompt.purpose,
            template_id: prompt.template_id.clone(),
            node_index: prompt.budget.node_index,
            prompt_tokens: out.usage.prompt_tokens,
            completion_tokens: out.usage.completion_tokens,
        });
        Ok(out)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for Box<M> {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError> {
        (**self).complete(prompt)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for std::sync::Arc<M> {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError> {
        (**self).complete(prompt)
    }
}

/// Whitespace-separated word count, the token measure used by the mocks.
pub fn word_count(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}
