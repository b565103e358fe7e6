//! Named LLM profiles loaded from TOML.
//!
//! ```toml
//! [profiles.gpt]
//! model = "gpt-4o"
//! endpoint = "https://api.openai.com/v1/chat/completions"
//! api_key_env = "OPENAI_API_KEY"
//! temperature = 0.5
//! retries = 2
//! style = "refined"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use chipbargain_core::llm::{LlmProfile, PromptStyle, DEFAULT_TEMPERATURE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub model: String,
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default)]
    pub style: PromptStyle,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

fn default_retries() -> u32 {
    2
}

fn default_timeout() -> u64 {
    120
}

impl ProfileEntry {
    pub fn llm_profile(&self) -> LlmProfile {
        LlmProfile {
            model: self.model.clone(),
            style: self.style,
            temperature: self.temperature,
            retries: self.retries,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    #[serde(default)]
    pub profiles: BTreeMap<String, ProfileEntry>,
}

impl Profiles {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    pub fn get(&self, name: &str) -> Option<&ProfileEntry> {
        self.profiles.get(name)
    }
}
