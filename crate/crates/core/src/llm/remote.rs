// SPDX-License-Identifier: Apache-2.0

//! Blocking chat-completions client.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Completion, LanguageModel, LlmError, PromptBundle};
use crate::domain::TokenUsage;
use crate::eda::AdmissionGate;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_API_KEY_ENV: &str = "EVOLVE_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: DEFAULT_ENDPOINT.to_string(),
            model_name: "gpt-4o-mini".to_string(),
            temperature: 0.6,
            max_tokens: 4096,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            timeout_secs: 300,
            max_in_flight: 4,
        }
    }
}

pub struct RemoteClient {
    config: LlmConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    gate: AdmissionGate,
}

impl RemoteClient {
    /// Reads the API key from the configured variable. A missing key is
    /// allowed for local endpoints that do not check it.
    pub fn new(config: LlmConfig) -> Result<Self, LlmError> {
        if config.endpoint.trim().is_empty() {
            return Err(LlmError::Config("empty endpoint".into()));
        }
        if !(0.0..=2.0).contains(&config.temperature) {
            return Err(LlmError::Config(format!("temperature {} outside [0, 2]", config.temperature)));
        }
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        let gate = AdmissionGate::new(config.max_in_flight);
        Ok(Self { config, api_key, agent, gate })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn request_body(&self, prompt: &PromptBundle) -> Value {
        json!({
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        })
    }
}

/// Interprets a chat-completions response body.
pub(crate) fn parse_response(body: &Value) -> Result<Completion, LlmError> {
    let choice = body
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| LlmError::Malformed("response has no choices".into()))?;
    let message = choice.get("message").ok_or_else(|| LlmError::Malformed("choice has no message".into()))?;
    if let Some(refusal) = message.get("refusal").and_then(Value::as_str) {
        return Err(LlmError::Refusal(refusal.to_string()));
    }
    if choice.get("finish_reason").and_then(Value::as_str) == Some("content_filter") {
        return Err(LlmError::Refusal("content filter".into()));
    }
    let text = message.get("content").and_then(Value::as_str).unwrap_or_default().to_string();
    let usage = body.get("usage");
    let count = |k: &str| usage.and_then(|u| u.get(k)).and_then(Value::as_u64).unwrap_or(0);
    Ok(Completion { text, usage: TokenUsage::new(count("prompt_tokens"), count("completion_tokens")) })
}

impl LanguageModel for RemoteClient {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError> {
        let _permit = self.gate.acquire();
        let mut req = self.agent.post(&self.config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(self.request_body(prompt)).map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 401 || status == 403 {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(LlmError::Auth(format!("HTTP {status}: {}", body.trim())));
        }
        if status == 429 || status >= 500 {
            return Err(LlmError::Transport(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(LlmError::Status { status, body: body.trim().to_string() });
        }
        let body: Value = resp.body_mut().read_json().map_err(|e| LlmError::Malformed(e.to_string()))?;
        parse_response(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{BudgetInfo, Purpose};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// Serves one canned HTTP response and returns the request body.
    fn serve_once(status: &str, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let status = status.to_string();
        let h = std::thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(s.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let resp = format!(
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            s.write_all(resp.as_bytes()).unwrap();
            String::from_utf8(buf).unwrap()
        });
        (format!("http://{addr}/v1/chat/completions"), h)
    }

    fn prompt() -> PromptBundle {
        PromptBundle {
            system: "sys".into(),
            user: "usr".into(),
            purpose: Purpose::InitialCode,
            template_id: "t".into(),
            budget: BudgetInfo::default(),
        }
    }

    fn client(endpoint: String) -> RemoteClient {
        RemoteClient::new(LlmConfig { endpoint, api_key_env: "EVOLVE_TEST_UNSET_KEY".into(), ..LlmConfig::default() })
            .unwrap()
    }

    #[test]
    fn success_parses_text_and_usage() {
        let (url, h) = serve_once(
            "200 OK",
            r#"{"choices":[{"message":{"role":"assistant","content":"```\nmodule m; endmodule\n```"},"finish_reason":"stop"}],"usage":{"prompt_tokens":12,"completion_tokens":7}}"#,
        );
        let out = client(url).complete(&prompt()).unwrap();
        assert_eq!(out.usage, TokenUsage::new(12, 7));
        assert!(out.text.contains("module m;"));
        let sent: Value = serde_json::from_str(&h.join().unwrap()).unwrap();
        assert_eq!(sent["temperature"], 0.6);
        assert_eq!(sent["messages"][1]["content"], "usr");
    }

    #[test]
    fn unauthorized_is_auth_error() {
        let (url, h) = serve_once("401 Unauthorized", r#"{"error":"bad key"}"#);
        assert!(matches!(client(url).complete(&prompt()), Err(LlmError::Auth(_))));
        h.join().unwrap();
    }

    #[test]
    fn server_error_is_transport() {
        let (url, h) = serve_once("503 Service Unavailable", "{}");
        assert!(client(url).complete(&prompt()).unwrap_err().is_transport());
        h.join().unwrap();
    }

    #[test]
    fn refusal_is_typed() {
        let body = json!({"choices":[{"message":{"content":null,"refusal":"cannot help"}}]});
        assert_eq!(parse_response(&body), Err(LlmError::Refusal("cannot help".into())));
    }
}
