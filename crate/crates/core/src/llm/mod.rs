//! LLM decision maker: renders memory into a multiple-choice prompt, queries
//! a chat-completion backend with retries and falls back to greedy.

mod backend;
mod error;
pub mod prompt;

use serde::{Deserialize, Serialize};

pub use backend::{Backend, ChatRequest, HttpBackend, ReferenceEcho, Scripted, ScriptedReply};
pub use error::{LlmError, ParseError};
pub use prompt::{build_prompt, offer_options, parse_decision, ActionOption, PromptBundle, PromptInput};

use crate::agent::{Action, ActionRecord, Observation, OutcomeStatus};
use crate::baselines::{approach, deliver, greedy_choice, greedy_policy, AgentMemory, DecisionContext, Policy};
use crate::world::ObjectCategory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub top_p: f64,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    /// Attempts per decision, at least one.
    pub retry_limit: u32,
    pub timeout_secs: u64,
    /// Base delay after a rate-limit reply, doubled per attempt.
    pub backoff_ms: u64,
    /// Previous actions shown in the prompt.
    pub previous_actions_shown: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            max_tokens: 512,
            temperature: 0.7,
            top_p: 1.0,
            api_key_env: "OPENAI_API_KEY".into(),
            retry_limit: 3,
            timeout_secs: 60,
            backoff_ms: 1000,
            previous_actions_shown: 10,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.retry_limit < 1 {
            return Err(LlmError::Config("retry_limit must be >= 1".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) || !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(LlmError::Config("temperature must lie in [0, 2] and top_p in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Appends the sighted objects to memory, keeping `memory.k` snapshots each.
pub fn memory_update(memory: &mut AgentMemory, obs: &Observation) {
    memory.update(obs);
}

/// One request/response pair, as written to `llm.log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub query: u64,
    pub attempt: u32,
    pub frame: u64,
    pub prompt: String,
    pub completion: Option<String>,
    pub error: Option<String>,
    /// Label of the parsed option.
    pub choice: Option<String>,
    /// Set on the record of a decision that fell back to greedy.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmDecision {
    pub option: Option<usize>,
    pub exchanges: Vec<Exchange>,
}

/// Queries until a completion parses or `retry_limit` attempts are used.
pub fn query_with_retry(
    backend: &mut dyn Backend,
    cfg: &LlmConfig,
    req: &ChatRequest,
    query: u64,
    frame: u64,
) -> LlmDecision {
    let mut exchanges = Vec::new();
    for attempt in 1..=cfg.retry_limit.max(1) {
        let mut ex = Exchange {
            query,
            attempt,
            frame,
            prompt: if attempt == 1 { req.user.clone() } else { String::new() },
            completion: None,
            error: None,
            choice: None,
            fallback: false,
        };
        match backend.complete(cfg, req) {
            Ok(text) => {
                let parsed = parse_decision(&text, &req.options);
                ex.completion = Some(text);
                match parsed {
                    Ok(i) => {
                        ex.choice = Some(req.options[i].label.clone());
                        exchanges.push(ex);
                        return LlmDecision { option: Some(i), exchanges };
                    }
                    Err(e) => ex.error = Some(e.to_string()),
                }
            }
            Err(e) => {
                if e == LlmError::RateLimited && cfg.backoff_ms > 0 {
                    std::thread::sleep(std::time::Duration::from_millis(cfg.backoff_ms << (attempt - 1).min(6)));
                }
                ex.error = Some(e.to_string());
            }
        }
        exchanges.push(ex);
    }
    if let Some(last) = exchanges.last_mut() {
        last.fallback = true;
    }
    LlmDecision { option: None, exchanges }
}

/// The LLM agent. The model only picks which object to walk to (or to
/// explore); picking up and delivering follow without a query.
pub struct LlmPolicy {
    pub config: LlmConfig,
    backend: Box<dyn Backend>,
    targets: Vec<ObjectCategory>,
    current: Option<u32>,
    previous: Vec<ActionRecord>,
    pending_start: u64,
    queries: u64,
    fallbacks: u32,
    log: Vec<Exchange>,
}

impl LlmPolicy {
    /// `targets` are the scene's target categories.
    pub fn new(config: LlmConfig, backend: Box<dyn Backend>, mut targets: Vec<ObjectCategory>) -> Self {
        targets.sort_by(|a, b| a.name.cmp(&b.name));
        targets.dedup_by(|a, b| a.name == b.name);
        Self {
            config,
            backend,
            targets,
            current: None,
            previous: Vec::new(),
            pending_start: 0,
            queries: 0,
            fallbacks: 0,
            log: Vec::new(),
        }
    }

    /// The prompt the policy would send in `ctx`.
    pub fn prompt(&self, ctx: &DecisionContext) -> PromptBundle {
        let shown = self.previous.len().saturating_sub(self.config.previous_actions_shown);
        let input = PromptInput {
            task: ctx.task,
            frame: ctx.frame,
            frame_limit: ctx.frame_limit,
            agent: ctx.agent,
            observation: ctx.observation,
            memory: ctx.memory,
            targets: &self.targets,
            previous: &self.previous[shown..],
        };
        build_prompt(&input, offer_options(ctx.memory))
    }

    pub fn log(&self) -> &[Exchange] {
        &self.log
    }

    fn choose(&mut self, ctx: &DecisionContext) -> Action {
        let bundle = self.prompt(ctx);
        let options = bundle.available_actions.clone();
        if options.len() == 1 {
            return options[0].action;
        }
        let reference = match greedy_choice(ctx) {
            Some(id) => options.iter().position(|o| o.action == Action::WalkTo(id)),
            None => options.iter().position(|o| o.action == Action::Explore),
        };
        let req = ChatRequest { system: prompt::SYSTEM_MESSAGE.into(), user: bundle.render(), options, reference };
        self.queries += 1;
        let d = query_with_retry(self.backend.as_mut(), &self.config, &req, self.queries, ctx.frame);
        self.log.extend(d.exchanges);
        match d.option {
            Some(i) => req.options[i].action,
            None => {
                self.fallbacks += 1;
                greedy_policy(ctx)
            }
        }
    }
}

impl Policy for LlmPolicy {
    fn name(&self) -> &str {
        "llm"
    }

    fn decide(&mut self, ctx: &DecisionContext) -> Action {
        self.pending_start = ctx.frame;
        if ctx.agent.carried.is_some() {
            return deliver(ctx);
        }
        if let Some(t) = self.current {
            let live = ctx.memory.get(t).is_some_and(|o| o.is_candidate());
            if live && ctx.in_reach(t) {
                return Action::PickUp(t);
            }
            self.current = None;
        }
        match self.choose(ctx) {
            Action::WalkTo(t) => {
                self.current = Some(t);
                approach(ctx, t)
            }
            other => other,
        }
    }

    fn feedback(&mut self, action: Action, outcome: OutcomeStatus, ctx: &DecisionContext) {
        self.previous.push(ActionRecord {
            frame_start: self.pending_start,
            action,
            outcome,
            frames_consumed: ctx.frame.saturating_sub(self.pending_start),
        });
        let settled = matches!(action, Action::PickUp(_)) || !matches!(outcome, OutcomeStatus::Success);
        if settled {
            self.current = None;
        }
    }

    fn fallbacks(&self) -> u32 {
        self.fallbacks
    }

    fn drain_log(&mut self) -> Vec<String> {
        self.log.drain(..).map(|e| serde_json::to_string(&e).expect("exchange serializes")).collect()
    }
}
