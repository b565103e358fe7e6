use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parse::{parse_candidates, parse_proposal, parse_response};
use super::prompt::{build_prompt, Candidate, PromptRole, DEFAULT_TEMPERATURE};
use crate::agents::{Agent, Observation};
use crate::game::state::check_offer;
use crate::game::{Offer, Response, TradeOffer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("transport failed: {0}")]
pub struct TransportError(pub String);

/// A chat-completion endpoint: text in, text out.
pub trait Transport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError>;
}

impl<T: Transport + ?Sized> Transport for alloc::boxed::Box<T> {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        (**self).complete(request)
    }
}

/// Replies from a fixed script, recording every request it receives.
#[derive(Debug, Clone, Default)]
pub struct ScriptedTransport {
    replies: VecDeque<Result<String, TransportError>>,
    pub requests: Vec<ChatRequest>,
}

impl ScriptedTransport {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedTransport {
            replies: replies.into_iter().map(|s| Ok(s.into())).collect(),
            requests: Vec::new(),
        }
    }

    pub fn push_reply(&mut self, reply: impl Into<String>) {
        self.replies.push_back(Ok(reply.into()));
    }

    pub fn push_failure(&mut self, message: impl Into<String>) {
        self.replies.push_back(Err(TransportError(message.into())));
    }

    pub fn remaining(&self) -> usize {
        self.replies.len()
    }
}

impl Transport for ScriptedTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        self.requests.push(request.clone());
        self.replies
            .pop_front()
            .unwrap_or_else(|| Err(TransportError("script exhausted".to_string())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    /// One generation call per decision.
    #[default]
    OutOfBox,
    /// Generate three ideas, then ask for the best one.
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmProfile {
    pub model: String,
    #[serde(default)]
    pub style: PromptStyle,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Extra attempts after the first one fails.
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

fn default_retries() -> u32 {
    2
}

impl LlmProfile {
    pub fn new(model: impl Into<String>, style: PromptStyle) -> Self {
        LlmProfile { model: model.into(), style, temperature: DEFAULT_TEMPERATURE, retries: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub turn: u32,
    pub role: PromptRole,
    pub attempt: u32,
    pub prompt: String,
    /// The raw reply, or the transport error.
    pub reply: Result<String, String>,
    /// Why the reply was not usable, if it was not.
    pub rejected: Option<String>,
}

/// A decision the agent could not get from the model and replaced with a
/// pass or a decline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degraded {
    pub turn: u32,
    pub role: PromptRole,
    pub last_error: String,
}

pub struct LlmAgent<T: Transport> {
    transport: T,
    profile: LlmProfile,
    transcript: Vec<TranscriptEntry>,
    degraded: Vec<Degraded>,
}

impl<T: Transport> LlmAgent<T> {
    pub fn new(transport: T, profile: LlmProfile) -> Self {
        LlmAgent { transport, profile, transcript: Vec::new(), degraded: Vec::new() }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn degraded(&self) -> &[Degraded] {
        &self.degraded
    }

    pub fn take_transcript(&mut self) -> Vec<TranscriptEntry> {
        core::mem::take(&mut self.transcript)
    }

    /// Sends prompts until `accept` yields a value or attempts run out.
    fn ask<R>(
        &mut self,
        obs: &Observation<'_>,
        role: PromptRole,
        prompt: &str,
        mut accept: impl FnMut(&str) -> Result<R, String>,
    ) -> Result<R, String> {
        let request = ChatRequest {
            model: self.profile.model.clone(),
            messages: alloc::vec![ChatMessage { role: "user".to_string(), content: prompt.to_string() }],
            temperature: self.profile.temperature,
        };
        let mut last = String::new();
        for attempt in 0..=self.profile.retries {
            let reply = self.transport.complete(&request);
            let outcome = match &reply {
                Ok(text) => accept(text),
                Err(e) => Err(e.to_string()),
            };
            self.transcript.push(TranscriptEntry {
                turn: obs.turn,
                role,
                attempt,
                prompt: prompt.to_string(),
                reply: reply.map_err(|e| e.0),
                rejected: outcome.as_ref().err().cloned(),
            });
            match outcome {
                Ok(v) => return Ok(v),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn usable_offer(obs: &Observation<'_>, offer: Offer) -> Result<Offer, String> {
        check_offer(obs.config, obs.holdings, obs.me, &offer.into())
            .map(|()| offer)
            .map_err(|v| v.to_string())
    }

    fn degrade(&mut self, obs: &Observation<'_>, role: PromptRole, last_error: String) {
        self.degraded.push(Degraded { turn: obs.turn, role, last_error });
    }

    fn propose_once(&mut self, obs: &Observation<'_>) -> Result<Offer, (PromptRole, String)> {
        let t = self.profile.temperature;
        let role = PromptRole::Proposer;
        let prompt = build_prompt(role, obs, None, None, t).map_err(|e| (role, e.to_string()))?;
        let config = obs.config;
        self.ask(obs, role, &prompt.text, |text| {
            let p = parse_proposal(config, text).map_err(|e| e.to_string())?;
            Self::usable_offer(obs, p.offer)
        })
        .map_err(|e| (role, e))
    }

    fn propose_refined(&mut self, obs: &Observation<'_>) -> Result<Offer, (PromptRole, String)> {
        let t = self.profile.temperature;
        let role = PromptRole::RefinedGenerate;
        let prompt = build_prompt(role, obs, None, None, t).map_err(|e| (role, e.to_string()))?;
        let config = obs.config;
        let ideas: Vec<Candidate> = self
            .ask(obs, role, &prompt.text, |text| {
                parse_candidates(config, text, 3).map_err(|e| alloc::format!("{e}"))
            })
            .map_err(|e| (role, e))?;
        let role = PromptRole::RefinedSelect;
        let prompt = build_prompt(role, obs, None, Some(&ideas), t).map_err(|e| (role, e.to_string()))?;
        self.ask(obs, role, &prompt.text, |text| {
            let p = parse_proposal(config, text).map_err(|e| e.to_string())?;
            Self::usable_offer(obs, p.offer)
        })
        .map_err(|e| (role, e))
    }
}

impl<T: Transport> Agent for LlmAgent<T> {
    fn kind(&self) -> &str {
        match self.profile.style {
            PromptStyle::OutOfBox => "llm",
            PromptStyle::Refined => "llm-refined",
        }
    }

    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer {
        let result = match self.profile.style {
            PromptStyle::OutOfBox => self.propose_once(obs),
            PromptStyle::Refined => self.propose_refined(obs),
        };
        match result {
            Ok(o) => o.into(),
            Err((role, e)) => {
                self.degrade(obs, role, e);
                TradeOffer::Pass
            }
        }
    }

    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response {
        let role = PromptRole::Responder;
        let Some(proposer) = obs.current_proposer() else {
            self.degrade(obs, role, "unknown proposer".to_string());
            return Response::Decline;
        };
        let prompt = match build_prompt(role, obs, Some((proposer, offer)), None, self.profile.temperature) {
            Ok(p) => p,
            Err(e) => {
                self.degrade(obs, role, e.to_string());
                return Response::Decline;
            }
        };
        match self.ask(obs, role, &prompt.text, |text| parse_response(text).map(|r| r.choice).map_err(|e| e.to_string())) {
            Ok(r) => r,
            Err(e) => {
                self.degrade(obs, role, e);
                Response::Decline
            }
        }
    }
}
