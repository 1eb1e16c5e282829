// SPDX-License-Identifier: Apache-2.0

use super::prompts::with_format_reminder;
use super::{extract_code, Completion, LanguageModel, LlmError, PromptBundle};
use crate::domain::TokenUsage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Extra attempts with the identical prompt after a transport error.
    pub transport_retries: u32,
    /// Extra attempts with a format reminder after unusable output.
    pub format_retries: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { transport_retries: 2, format_retries: 1 }
    }
}

/// Calls the model, repeating the identical prompt on transport errors.
/// The returned usage covers successful calls only.
pub fn complete_with_retry(
    model: &dyn LanguageModel,
    prompt: &PromptBundle,
    policy: RetryPolicy,
) -> Result<Completion, LlmError> {
    let mut attempt = 0;
    loop {
        match model.complete(prompt) {
            Err(e) if e.is_transport() && attempt < policy.transport_retries => {
                attempt += 1;
                log::warn!("{} attempt {attempt} failed: {e}; retrying", prompt.template_id);
            }
            other => return other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeResponse {
    pub code: String,
    pub raw: String,
    /// Summed over every attempt, including ones that were discarded.
    pub usage: TokenUsage,
}

/// Requests code; unusable output gets a format-reminder retry.
pub fn complete_code(
    model: &dyn LanguageModel,
    prompt: &PromptBundle,
    policy: RetryPolicy,
) -> Result<CodeResponse, LlmError> {
    complete_parsed(model, prompt, policy, extract_code)
}

/// Requests a response and parses it with `parse`; a parse failure gets a
/// format-reminder retry.
pub fn complete_parsed<T>(
    model: &dyn LanguageModel,
    prompt: &PromptBundle,
    policy: RetryPolicy,
    parse: impl Fn(&str) -> Result<T, LlmError>,
) -> Result<CodeResponse, LlmError>
where
    T: Into<String>,
{
    let mut usage = TokenUsage::default();
    let mut current = prompt.clone();
    let mut format_attempt = 0;
    loop {
        let out = complete_with_retry(model, &current, policy)?;
        usage += out.usage;
        match parse(&out.text) {
            Ok(code) => return Ok(CodeResponse { code: code.into(), raw: out.text, usage }),
            Err(e @ LlmError::Malformed(_)) if format_attempt < policy.format_retries => {
                format_attempt += 1;
                log::warn!("{}: {e}; retrying with format reminder", prompt.template_id);
                current = with_format_reminder(prompt);
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{BudgetInfo, Purpose};
    use std::sync::Mutex;

    struct Scripted(Mutex<Vec<Result<Completion, LlmError>>>, Mutex<Vec<String>>);

    impl Scripted {
        fn new(mut replies: Vec<Result<Completion, LlmError>>) -> Self {
            replies.reverse();
            Self(Mutex::new(replies), Mutex::new(Vec::new()))
        }
    }

    impl LanguageModel for Scripted {
        fn complete(&self, p: &PromptBundle) -> Result<Completion, LlmError> {
            self.1.lock().unwrap().push(p.user.clone());
            self.0.lock().unwrap().pop().expect("unexpected call")
        }
    }

    fn ok(text: &str) -> Result<Completion, LlmError> {
        Ok(Completion { text: text.into(), usage: TokenUsage::new(10, 1) })
    }

    fn prompt() -> PromptBundle {
        PromptBundle {
            system: "s".into(),
            user: "u".into(),
            purpose: Purpose::Refine,
            template_id: "t".into(),
            budget: BudgetInfo::default(),
        }
    }

    #[test]
    fn transport_errors_retry_twice() {
        let t = || Err(LlmError::Transport("reset".into()));
        let m = Scripted::new(vec![t(), t(), ok("```\nx\n```")]);
        assert_eq!(complete_code(&m, &prompt(), RetryPolicy::default()).unwrap().code, "x");
        let m = Scripted::new(vec![t(), t(), t()]);
        assert!(complete_code(&m, &prompt(), RetryPolicy::default()).unwrap_err().is_transport());
    }

    #[test]
    fn auth_is_not_retried() {
        let m = Scripted::new(vec![Err(LlmError::Auth("401".into()))]);
        assert!(matches!(complete_code(&m, &prompt(), RetryPolicy::default()), Err(LlmError::Auth(_))));
    }

    #[test]
    fn malformed_gets_one_reminder() {
        let m = Scripted::new(vec![ok("   "), ok("```\ny\n```")]);
        let out = complete_code(&m, &prompt(), RetryPolicy::default()).unwrap();
        assert_eq!(out.code, "y");
        assert_eq!(out.usage, TokenUsage::new(20, 2));
        let prompts = m.1.lock().unwrap().clone();
        assert_eq!(prompts[0], "u");
        assert!(prompts[1].starts_with("u\n") && prompts[1].contains("previous reply could not be used"));

        let m = Scripted::new(vec![ok(""), ok("")]);
        assert!(matches!(complete_code(&m, &prompt(), RetryPolicy::default()), Err(LlmError::Malformed(_))));
    }
}
