// SPDX-License-Identifier: Apache-2.0

use super::LlmError;

/// Returns the last fenced code block of `response`, or the whole response
/// when it contains no fence. An unterminated final fence runs to the end.
pub fn extract_code(response: &str) -> Result<String, LlmError> {
    let mut last: Option<Vec<&str>> = None;
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        if line.trim_start().starts_with("```") {
            match current.take() {
                Some(block) => last = Some(block),
                None => current = Some(Vec::new()),
            }
        } else if let Some(block) = current.as_mut() {
            block.push(line);
        }
    }
    if let Some(block) = current {
        last = Some(block);
    }
    let code = match last {
        Some(lines) => lines.join("\n"),
        None => response.to_string(),
    };
    let code = code.trim_matches('\n').trim_end().to_string();
    if code.trim().is_empty() {
        return Err(LlmError::Malformed("response contains no code".into()));
    }
    Ok(code)
}
