//! Minimal blocking client for an optional LLM endpoint.
//!
//! The endpoint receives a JSON body and answers with JSON. The reply text
//! is taken from the first of `text`, `output`, `content`,
//! `choices[0].message.content` or `choices[0].text`; a non-JSON body is used
//! verbatim. The bearer token, when set, is read from an environment
//! variable so it never appears on the command line.

use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

/// Environment variable holding the bearer token.
pub const DEFAULT_TOKEN_ENV: &str = "CAUSALQA_LLM_TOKEN";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("LLM backend unreachable at {endpoint}: {cause}")]
    BackendUnreachable { endpoint: String, cause: String },
    #[error("LLM backend returned an unusable reply: {0}")]
    BadReply(String),
}

#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub endpoint: String,
    pub token_env: String,
    pub timeout: Duration,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), token_env: DEFAULT_TOKEN_ENV.to_string(), timeout: Duration::from_secs(30) }
    }
}

#[derive(Debug, Clone)]
pub struct LlmClient {
    config: LlmConfig,
    agent: ureq::Agent,
}

impl LlmClient {
    pub fn new(config: LlmConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(config.timeout)).build().into();
        Self { config, agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.config.endpoint
    }

    /// Posts `body` and returns the decoded reply (a JSON string value when
    /// the body was not JSON).
    pub fn post(&self, body: &Value) -> Result<Value, LlmError> {
        let unreachable = |e: ureq::Error| LlmError::BackendUnreachable { endpoint: self.config.endpoint.clone(), cause: e.to_string() };
        let mut req = self.agent.post(&self.config.endpoint);
        if let Ok(token) = std::env::var(&self.config.token_env) {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send_json(body).map_err(unreachable)?;
        let text = resp.body_mut().read_to_string().map_err(unreachable)?;
        Ok(serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    /// Posts `body` and extracts the reply text.
    pub fn complete(&self, body: &Value) -> Result<String, LlmError> {
        let reply = self.post(body)?;
        reply_text(&reply).ok_or_else(|| LlmError::BadReply(reply.to_string()))
    }
}

pub fn reply_text(v: &Value) -> Option<String> {
    if let Value::String(s) = v {
        return Some(s.clone());
    }
    for key in ["text", "output", "content"] {
        if let Some(s) = v.get(key).and_then(Value::as_str) {
            return Some(s.to_string());
        }
    }
    let choice = v.get("choices")?.get(0)?;
    choice.pointer("/message/content").or_else(|| choice.get("text")).and_then(Value::as_str).map(str::to_string)
}


#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reply_shapes() {
        assert_eq!(reply_text(&json!({"text": "a"})).as_deref(), Some("a"));
        assert_eq!(reply_text(&json!({"choices": [{"message": {"content": "b"}}]})).as_deref(), Some("b"));
        assert_eq!(reply_text(&json!("c")).as_deref(), Some("c"));
        assert_eq!(reply_text(&json!({"nope": 1})), None);
    }

    #[test]
    fn posts_json_and_reads_reply() {
        let (url, rx) = testing::serve_once(r#"{"text": "hello"}"#);
        let client = LlmClient::new(LlmConfig::new(url));
        assert_eq!(client.complete(&json!({"prompt": "p"})).unwrap(), "hello");
        let (_, body) = rx.recv().unwrap();
        assert_eq!(serde_json::from_str::<Value>(&body).unwrap(), json!({"prompt": "p"}));
    }

    #[test]
    fn unreachable_endpoint_is_reported() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let client = LlmClient::new(LlmConfig::new(format!("http://{addr}/")));
        assert!(matches!(client.post(&json!({})), Err(LlmError::BackendUnreachable { .. })));
    }
}
