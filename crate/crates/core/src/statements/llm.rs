//! The language-model boundary: a blocking `complete(prompt)` interface, an
//! HTTP client for chat-completion endpoints, and two offline mocks.

use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::lexer::{tokenize, Parser, Token};
use super::plan_reply::{parse_plan_reply, render_plan_block, PlanReplyError};
use super::prompt::{build_translation_prompt, default_execution_prompt};
use super::record::{parse_record_syntax, ExtractionRecord, RecordError};
use crate::model::CreditNetwork;
use crate::strategies::{
    plan_brute_force, plan_greedy_compression, plan_greedy_removal, ExecutionPlan, OperationKind,
    StrategyConfig, StrategyName,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("llm client configuration: {0}")]
    Config(String),
    #[error("llm transport failure: {0}")]
    Transport(String),
    #[error("llm endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected llm response: {0}")]
    Response(String),
    #[error("mock client: {0}")]
    Script(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;
}

impl<T: LlmClient + ?Sized> LlmClient for &T {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for Box<T> {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }
}

/// Timeout and retry policy, read from a JSON config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpSettings {
    pub timeout_secs: u64,
    /// Extra attempts after a transport failure, 429 or 5xx status.
    pub retries: u32,
    pub backoff_ms: u64,
    /// Concurrent requests when translating a corpus.
    pub max_in_flight: usize,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self {
            timeout_secs: 120,
            retries: 2,
            backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

impl HttpSettings {
    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        let text = fs::read_to_string(path).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))
    }
}

/// Client for a chat-completion endpoint. `endpoint` is the full request URL.
pub struct HttpClient {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    settings: HttpSettings,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>, settings: HttpSettings) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
            settings,
            agent,
        }
    }

    /// Reads `LLM_ENDPOINT`, `LLM_MODEL` and optionally `LLM_API_KEY`.
    pub fn from_env(settings: HttpSettings) -> Result<Self, LlmError> {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        let endpoint = var("LLM_ENDPOINT").ok_or_else(|| LlmError::Config("LLM_ENDPOINT is not set".into()))?;
        let model = var("LLM_MODEL").ok_or_else(|| LlmError::Config("LLM_MODEL is not set".into()))?;
        Ok(Self::new(endpoint, model, var("LLM_API_KEY"), settings))
    }

    pub fn settings(&self) -> &HttpSettings {
        &self.settings
    }

    fn attempt(&self, body: &Value) -> Result<String, LlmError> {
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Status { status, body: text });
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| LlmError::Response(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| LlmError::Response("missing choices[0].message.content".into()))
    }
}

fn retryable(err: &LlmError) -> bool {
    match err {
        LlmError::Transport(_) => true,
        LlmError::Status { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

impl LlmClient for HttpClient {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Err(err) if retryable(&err) && attempt < self.settings.retries => {
                    attempt += 1;
                    thread::sleep(Duration::from_millis(self.settings.backoff_ms * u64::from(attempt)));
                }
                result => return result,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(default)]
    pub expect_substring: String,
    pub reply: String,
}

/// Replays scripted replies. Each call takes the first unused entry whose
/// `expect_substring` occurs in the prompt, so a script written in call
/// order replays in order and concurrent callers still get their own entry.
pub struct ScriptedMock {
    entries: Mutex<Vec<(ScriptEntry, bool)>>,
}

impl ScriptedMock {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        Self {
            entries: Mutex::new(entries.into_iter().map(|e| (e, false)).collect()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let entries: Vec<ScriptEntry> =
            serde_json::from_str(text).map_err(|e| LlmError::Config(format!("mock script: {e}")))?;
        Ok(Self::new(entries))
    }

    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        let text = fs::read_to_string(path).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn remaining(&self) -> usize {
        self.entries.lock().expect("mock lock").iter().filter(|(_, used)| !used).count()
    }
}

impl LlmClient for ScriptedMock {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let mut entries = self.entries.lock().expect("mock lock");
        let (entry, used) = entries
            .iter_mut()
            .find(|(entry, used)| !*used && prompt.contains(&entry.expect_substring))
            .ok_or_else(|| LlmError::Script("no unused scripted reply matches the prompt".into()))?;
        *used = true;
        Ok(entry.reply.clone())
    }
}

/// Answers execution prompts by running the greedy or oracle strategy on
/// the network it reads back out of the prompt.
pub struct DelegatingMock {
    strategy: StrategyName,
    config: StrategyConfig,
}

impl DelegatingMock {
    pub fn new(strategy: StrategyName, config: StrategyConfig) -> Result<Self, LlmError> {
        match strategy {
            StrategyName::Greedy | StrategyName::Oracle => Ok(Self { strategy, config }),
            other => Err(LlmError::Config(format!("cannot delegate to the {other} strategy"))),
        }
    }
}

/// Recovers the network and operation from an execution prompt.
pub fn read_execution_prompt(prompt: &str) -> Result<(CreditNetwork, OperationKind), LlmError> {
    let bad = |what: &str| LlmError::Script(format!("prompt has no readable {what}"));
    let section = prompt
        .split("## Financial operation")
        .next()
        .ok_or_else(|| bad("network section"))?;
    let kind = if prompt.contains("Operation: portfolio compression") {
        OperationKind::Compression
    } else if prompt.contains("Operation: debt removal") {
        OperationKind::Removal
    } else {
        return Err(bad("operation"));
    };
    let value_after = |name: &str| -> Result<Vec<Vec<f64>>, LlmError> {
        let start = section.find(&format!("\n{name} = ")).ok_or_else(|| bad(name))? + name.len() + 4;
        let text = section[start..].split("\n\n").next().unwrap_or("");
        let mut p = Parser::new(tokenize(text).map_err(|_| bad(name))?, text);
        let row = |p: &mut Parser| p.list(Token::LBracket, Token::RBracket, Parser::number);
        let parsed = if name == "e" {
            row(&mut p).map(|r| vec![r])
        } else {
            p.list(Token::LBracket, Token::RBracket, row)
        };
        parsed.map_err(|_| bad(name))
    };
    let liabilities = value_after("L")?;
    let assets = value_after("e")?.remove(0);
    let network = CreditNetwork::unlabelled(liabilities, assets).map_err(|e| LlmError::Script(e.to_string()))?;
    Ok((network, kind))
}

impl LlmClient for DelegatingMock {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let (network, kind) = read_execution_prompt(prompt)?;
        let plan = match (self.strategy, kind) {
            (StrategyName::Oracle, kind) => plan_brute_force(&network, kind, &self.config),
            (_, OperationKind::Compression) => plan_greedy_compression(&network, &self.config),
            (_, OperationKind::Removal) => plan_greedy_removal(&network, &self.config),
        }
        .map_err(|e| LlmError::Script(e.to_string()))?;
        Ok(format!(
            "Plan chosen by the {} strategy: {}.\n\n{}",
            self.strategy,
            plan.rationale(),
            render_plan_block(&plan, kind)
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranslateError {
    #[error("empty statement")]
    EmptyStatement,
    #[error(transparent)]
    Transport(#[from] LlmError),
    #[error(transparent)]
    Malformed(#[from] RecordError),
}

/// One prompt, no retry on content. The reply only has to match the record
/// grammar; semantic problems surface as anomalies during aggregation.
pub fn llm_translate(client: &dyn LlmClient, statement: &str) -> Result<ExtractionRecord, TranslateError> {
    let prompt = build_translation_prompt(statement).ok_or(TranslateError::EmptyStatement)?;
    let reply = client.complete(&prompt)?;
    Ok(parse_record_syntax(&reply)?)
}

/// Translates statements with at most `max_in_flight` concurrent requests;
/// results come back in input order.
pub fn translate_corpus<S: AsRef<str> + Sync>(
    client: &dyn LlmClient,
    statements: &[S],
    max_in_flight: usize,
) -> Vec<Result<ExtractionRecord, TranslateError>> {
    let translate = |s: &S| llm_translate(client, s.as_ref());
    if max_in_flight <= 1 {
        return statements.iter().map(translate).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(max_in_flight).build() {
        Ok(pool) => pool.install(|| statements.par_iter().map(translate).collect()),
        Err(_) => statements.iter().map(translate).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuggestError {
    #[error(transparent)]
    Transport(#[from] LlmError),
    #[error("malformed plan in reply: {0}")]
    MalformedPlan(String),
    #[error("plan in reply does not fit the network: {0}")]
    InvalidPlan(String),
}

impl From<PlanReplyError> for SuggestError {
    fn from(err: PlanReplyError) -> Self {
        match err {
            PlanReplyError::Malformed(msg) => SuggestError::MalformedPlan(msg),
            PlanReplyError::Invalid(op) => SuggestError::InvalidPlan(op.to_string()),
        }
    }
}

pub fn llm_suggest(
    client: &dyn LlmClient,
    network: &CreditNetwork,
    kind: OperationKind,
    config: &StrategyConfig,
) -> Result<ExecutionPlan, SuggestError> {
    let reply = client.complete(&default_execution_prompt(network, kind))?;
    let proposed = parse_plan_reply(&reply, kind)?;
    Ok(proposed.into_plan(network, config.order_seed, StrategyName::Llm)?)
}
