// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use super::{complete_with_retry, prompts, LanguageModel, RetryPolicy};
use crate::domain::ProblemSpec;
use crate::eval::{FirstLinesSummarizer, Summarizer, Summary};

pub const SUMMARY_MAX_WORDS: usize = 200;

/// Asks the model for a short architectural summary, falling back to the
/// leading lines of the code when the call fails.
pub struct LlmSummarizer {
    model: Arc<dyn LanguageModel>,
    policy: RetryPolicy,
}

impl LlmSummarizer {
    pub fn new(model: Arc<dyn LanguageModel>, policy: RetryPolicy) -> Self {
        Self { model, policy }
    }
}

fn clamp_words(text: &str, max: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= max {
        text.trim().to_string()
    } else {
        format!("{} ...", words[..max].join(" "))
    }
}

impl Summarizer for LlmSummarizer {
    fn summarize(&self, code: &str, spec: &ProblemSpec) -> Summary {
        match complete_with_retry(self.model.as_ref(), &prompts::summary(code), self.policy) {
            Ok(c) if !c.text.trim().is_empty() => {
                Summary { text: clamp_words(&c.text, SUMMARY_MAX_WORDS), usage: c.usage }
            }
            Ok(c) => Summary { usage: c.usage, ..FirstLinesSummarizer.summarize(code, spec) },
            Err(e) => {
                log::warn!("design summary unavailable ({e}); using code excerpt");
                FirstLinesSummarizer.summarize(code, spec)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_long_summaries() {
        let long = "w ".repeat(300);
        let out = clamp_words(&long, SUMMARY_MAX_WORDS);
        assert_eq!(out.split_whitespace().count(), SUMMARY_MAX_WORDS + 1);
        assert!(out.ends_with("..."));
        assert_eq!(clamp_words(" short text ", 200), "short text");
    }
}
