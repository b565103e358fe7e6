//! Language-model seats: prompt rendering, reply parsing and an agent that
//! talks to any chat-completion transport.

mod agent;
mod parse;
mod prompt;

pub use agent::{
    ChatMessage, ChatRequest, Degraded, LlmAgent, LlmProfile, PromptStyle, ScriptedTransport,
    TranscriptEntry, Transport, TransportError,
};
pub use parse::{
    parse_candidates, parse_proposal, parse_response, ParseError, ParseErrorKind, ProposalTags,
    ResponseTags,
};
pub use prompt::{
    build_prompt, player_name, render_history, signed_dollars, Candidate, PromptBundle, PromptRole,
    TemplateError, DEFAULT_TEMPERATURE, PROPOSER, REFINED_GENERATE, REFINED_SELECT, RESPONDER,
    RULES,
};
