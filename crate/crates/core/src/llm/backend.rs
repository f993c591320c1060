//! Chat-completion backends: an HTTP client and offline mocks.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::prompt::ActionOption;
use super::{LlmConfig, LlmError};

/// One single-turn completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    pub options: Vec<ActionOption>,
    /// Index of the option the greedy baseline would take. Read only by
    /// offline backends; never sent over the wire.
    pub reference: Option<usize>,
}

pub trait Backend: Send {
    fn name(&self) -> &str;
    fn complete(&mut self, cfg: &LlmConfig, req: &ChatRequest) -> Result<String, LlmError>;
}

/// Answers with the reference option, or the last option when there is none.
#[derive(Debug, Default, Clone)]
pub struct ReferenceEcho;

impl Backend for ReferenceEcho {
    fn name(&self) -> &str {
        "reference-echo"
    }

    fn complete(&mut self, _cfg: &LlmConfig, req: &ChatRequest) -> Result<String, LlmError> {
        let i = req.reference.unwrap_or(req.options.len().saturating_sub(1));
        let o = req.options.get(i).ok_or_else(|| LlmError::BadResponse("no options offered".into()))?;
        Ok(format!("The reference choice is {}.\nAnswer: {}", o.text, o.label))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ScriptedReply {
    Text(String),
    Timeout,
    Transport(String),
    RateLimited,
}

/// Replays a fixed list of replies keyed by query order. Once the list is
/// used up it either echoes the reference option or reports itself unavailable.
#[derive(Debug, Clone)]
pub struct Scripted {
    pub replies: Vec<ScriptedReply>,
    pub next: usize,
    pub echo_when_done: bool,
}

impl Scripted {
    pub fn new(replies: Vec<ScriptedReply>) -> Self {
        Self { replies, next: 0, echo_when_done: false }
    }

    pub fn then_echo(mut self) -> Self {
        self.echo_when_done = true;
        self
    }
}

impl Backend for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&mut self, cfg: &LlmConfig, req: &ChatRequest) -> Result<String, LlmError> {
        let Some(r) = self.replies.get(self.next).cloned() else {
            return if self.echo_when_done {
                ReferenceEcho.complete(cfg, req)
            } else {
                Err(LlmError::Unavailable("script exhausted".into()))
            };
        };
        self.next += 1;
        match r {
            ScriptedReply::Text(t) => Ok(t),
            ScriptedReply::Timeout => Err(LlmError::Timeout),
            ScriptedReply::Transport(m) => Err(LlmError::Transport(m)),
            ScriptedReply::RateLimited => Err(LlmError::RateLimited),
        }
    }
}

/// OpenAI-style chat-completions endpoint.
pub struct HttpBackend {
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(cfg: &LlmConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: [WireMessage<'a>; 2],
    max_tokens: u32,
    temperature: f64,
    top_p: f64,
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&mut self, cfg: &LlmConfig, req: &ChatRequest) -> Result<String, LlmError> {
        let key = std::env::var(&cfg.api_key_env)
            .map_err(|_| LlmError::Auth(format!("environment variable {} is not set", cfg.api_key_env)))?;
        let body = WireRequest {
            model: &cfg.model,
            messages: [
                WireMessage { role: "system", content: &req.system },
                WireMessage { role: "user", content: &req.user },
            ],
            max_tokens: cfg.max_tokens,
            temperature: cfg.temperature,
            top_p: cfg.top_p,
        };
        let mut resp = self
            .agent
            .post(&cfg.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(&body)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => LlmError::Timeout,
                other => LlmError::Transport(other.to_string()),
            })?;
        match resp.status().as_u16() {
            200..=299 => {}
            401 | 403 => return Err(LlmError::Auth(format!("status {}", resp.status()))),
            429 => return Err(LlmError::RateLimited),
            s => return Err(LlmError::Transport(format!("status {s}"))),
        }
        let v: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| LlmError::BadResponse(e.to_string()))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))
    }
}
