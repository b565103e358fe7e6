//! OpenAI-compatible chat-completions transport.

use std::time::Duration;

use chipbargain_core::llm::{ChatRequest, Transport, TransportError};
use serde::Deserialize;

use crate::profiles::ProfileEntry;

pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport { agent, endpoint: endpoint.into(), api_key }
    }

    /// Reads the API key from the profile's environment variable, if any.
    pub fn from_profile(profile: &ProfileEntry) -> anyhow::Result<Self> {
        let api_key = match &profile.api_key_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| anyhow::anyhow!("environment variable {var} is not set"))?,
            ),
            None => None,
        };
        Ok(Self::new(
            profile.endpoint.clone(),
            api_key,
            Duration::from_secs(profile.timeout_secs),
        ))
    }
}

impl Transport for HttpTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(request).map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))?;
        if !status.is_success() {
            let snippet: String = body.chars().take(200).collect();
            return Err(TransportError(format!("HTTP {status}: {snippet}")));
        }
        let parsed: Completion =
            serde_json::from_str(&body).map_err(|e| TransportError(format!("bad completion body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError("completion has no message content".into()))
    }
}
