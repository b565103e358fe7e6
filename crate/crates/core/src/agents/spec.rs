use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Names a kind of seat: `bayesian`, `greedy`, `random`, `llm:<profile>` or
/// `human`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AgentSpec {
    Bayesian,
    Greedy,
    Random,
    Llm(String),
    Human,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentSpecError {
    #[error("unknown agent kind {0:?}")]
    Unknown(String),
    #[error("llm seat needs a profile name, as in llm:<profile>")]
    MissingProfile,
}

impl AgentSpec {
    /// Parses a comma-separated seat list such as `bayesian,greedy,human`.
    pub fn parse_list(s: &str) -> Result<Vec<AgentSpec>, AgentSpecError> {
        s.split(',').map(str::parse).collect()
    }

    pub fn is_human(&self) -> bool {
        matches!(self, AgentSpec::Human)
    }
}

impl FromStr for AgentSpec {
    type Err = AgentSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(profile) = s.strip_prefix("llm:") {
            let profile = profile.trim();
            if profile.is_empty() {
                return Err(AgentSpecError::MissingProfile);
            }
            return Ok(AgentSpec::Llm(profile.to_string()));
        }
        match s.to_ascii_lowercase().as_str() {
            "bayesian" => Ok(AgentSpec::Bayesian),
            "greedy" => Ok(AgentSpec::Greedy),
            "random" => Ok(AgentSpec::Random),
            "human" => Ok(AgentSpec::Human),
            "llm" => Err(AgentSpecError::MissingProfile),
            _ => Err(AgentSpecError::Unknown(s.to_string())),
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Bayesian => f.write_str("bayesian"),
            AgentSpec::Greedy => f.write_str("greedy"),
            AgentSpec::Random => f.write_str("random"),
            AgentSpec::Llm(p) => write!(f, "llm:{p}"),
            AgentSpec::Human => f.write_str("human"),
        }
    }
}

impl Serialize for AgentSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AgentSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
