use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{LlmProvider, PromptRequest, ProviderError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
    #[serde(default)]
    pub temperature: Option<f32>,
}

fn default_timeout_s() -> u64 {
    DEFAULT_TIMEOUT.as_secs()
}

/// Chat-completions client for any OpenAI-compatible endpoint.
pub struct OpenAiCompatible {
    config: LiveConfig,
    // built lazily: a blocking client must not be created on an async worker
    client: OnceLock<reqwest::blocking::Client>,
}

impl OpenAiCompatible {
    pub fn new(config: LiveConfig) -> Result<Self, ProviderError> {
        if config.endpoint.trim().is_empty() {
            return Err(ProviderError::Config("endpoint is empty".into()));
        }
        if config.model.trim().is_empty() {
            return Err(ProviderError::Config("model is empty".into()));
        }
        Ok(Self {
            config,
            client: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'))
    }

    fn client(&self) -> Result<&reqwest::blocking::Client, ProviderError> {
        if let Some(c) = self.client.get() {
            return Ok(c);
        }
        let built = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.config.timeout_s))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(self.client.get_or_init(|| built))
    }

    pub(crate) fn body(&self, request: &PromptRequest) -> serde_json::Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        body
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

pub(crate) fn reply_text(body: &str) -> Result<String, ProviderError> {
    let parsed: ChatResponse = serde_json::from_str(body)
        .map_err(|e| ProviderError::Transport(format!("unexpected response body: {e}")))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| ProviderError::Transport("response has no message content".into()))
}

impl LlmProvider for OpenAiCompatible {
    fn complete(&self, request: &PromptRequest) -> Result<String, ProviderError> {
        let mut call = self.client()?.post(self.url()).json(&self.body(request));
        if let Some(key) = &self.config.api_key {
            call = call.bearer_auth(key);
        }
        let response = call
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ProviderError::Http {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }
        reply_text(&text)
    }

    fn name(&self) -> &str {
        &self.config.model
    }

    fn deterministic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{params, render, PromptKind};

    fn provider() -> OpenAiCompatible {
        OpenAiCompatible::new(LiveConfig {
            endpoint: "http://localhost:9/v1/".into(),
            model: "test-model".into(),
            api_key: None,
            timeout_s: 1,
            temperature: Some(0.0),
        })
        .unwrap()
    }

    #[test]
    fn request_body_carries_both_messages() {
        let req = render(PromptKind::Classify, &params([("message", "hi")])).unwrap();
        let body = provider().body(&req);
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], req.user_text.as_str());
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(provider().url(), "http://localhost:9/v1/chat/completions");
    }

    #[test]
    fn reply_extraction() {
        assert_eq!(
            reply_text(r#"{"choices":[{"message":{"role":"assistant","content":"A"}}]}"#).unwrap(),
            "A"
        );
        assert!(reply_text(r#"{"choices":[]}"#).is_err());
        assert!(reply_text("not json").is_err());
    }

    #[test]
    fn empty_config_rejected() {
        assert!(OpenAiCompatible::new(LiveConfig {
            endpoint: " ".into(),
            model: "m".into(),
            api_key: None,
            timeout_s: 60,
            temperature: None,
        })
        .is_err());
    }
}
