use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::Observation;
use crate::game::{GameConfig, Offer, PlayerId, Response, TradeOffer, TurnRecord};
use crate::money::Cents;

pub const RULES: &str = include_str!("templates/rules.txt");
pub const PROPOSER: &str = include_str!("templates/proposer.txt");
pub const RESPONDER: &str = include_str!("templates/responder.txt");
pub const REFINED_GENERATE: &str = include_str!("templates/refined_generate.txt");
pub const REFINED_SELECT: &str = include_str!("templates/refined_select.txt");

pub const DEFAULT_TEMPERATURE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptRole {
    Proposer,
    Responder,
    RefinedGenerate,
    RefinedSelect,
}

impl PromptRole {
    pub fn template(self) -> &'static str {
        match self {
            PromptRole::Proposer => PROPOSER,
            PromptRole::Responder => RESPONDER,
            PromptRole::RefinedGenerate => REFINED_GENERATE,
            PromptRole::RefinedSelect => REFINED_SELECT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub role: PromptRole,
    pub text: String,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("the responder prompt needs the offer under consideration")]
    MissingOffer,
    #[error("the selection prompt needs candidate trades")]
    MissingCandidates,
    #[error("slot {{{{{0}}}}} was left unfilled")]
    Unfilled(String),
}

/// A trade idea produced by the generation step, as it will be shown back to
/// the model for selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub reasoning: Option<String>,
    pub offer: Offer,
}

/// Label used for a seat in prompts and histories.
pub fn player_name(p: PlayerId) -> String {
    format!("Player {}", p.0 + 1)
}

/// Dollar amount with an explicit sign, e.g. `+1.10`.
pub fn signed_dollars(c: Cents) -> String {
    if c.0 >= 0 {
        format!("+{c}")
    } else {
        c.to_string()
    }
}

fn chips(config: &GameConfig, color: crate::game::ColorId, qty: u32) -> String {
    format!("{qty} {}", config.color_name(color))
}

fn preference_description(obs: &Observation<'_>) -> String {
    obs.config
        .color_ids()
        .map(|c| format!("{} chips are worth ${} each", obs.config.color_name(c), obs.my_values[c.0]))
        .collect::<Vec<_>>()
        .join(", ")
}

fn item(obs: &Observation<'_>) -> String {
    obs.config
        .color_ids()
        .map(|c| format!("{} {}", obs.holdings.get(obs.me, c), obs.config.color_name(c)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One line per completed turn, as shown on the public ledger.
pub fn render_history(config: &GameConfig, history: &[TurnRecord]) -> String {
    if history.is_empty() {
        return "empty; no trades have been proposed yet".to_string();
    }
    let n = config.n_players as u32;
    let mut out = String::new();
    for rec in history {
        let _ = write!(out, "\nRound {}, turn {}: {} ", rec.round + 1, rec.turn % n + 1, player_name(rec.proposer));
        match rec.offer {
            TradeOffer::Pass => out.push_str("passed."),
            TradeOffer::Trade(o) => {
                let _ = write!(
                    out,
                    "offered to give {} and get {}. ",
                    chips(config, o.give_color, o.give_qty),
                    chips(config, o.get_color, o.get_qty)
                );
                let verdicts: Vec<String> = rec
                    .responses
                    .iter()
                    .enumerate()
                    .filter_map(|(i, r)| {
                        let word = match (*r)? {
                            Response::Accept => "accepted",
                            Response::Decline => "declined",
                        };
                        Some(format!("{} {word}", player_name(PlayerId(i))))
                    })
                    .collect();
                out.push_str(&verdicts.join(", "));
                match rec.selected_acceptor {
                    Some(p) => {
                        let _ = write!(out, "; traded with {}.", player_name(p));
                    }
                    None => out.push_str("; no trade."),
                }
            }
        }
    }
    out
}

fn render_candidate(config: &GameConfig, i: usize, c: &Candidate) -> String {
    let o = &c.offer;
    format!(
        "Trade idea {}:\n<REASONING>\n{}\n</REASONING>\n<GET_COLOR>{}</GET_COLOR>\n<GET_QUANTITY>{}</GET_QUANTITY>\n<GIVE_COLOR>{}</GIVE_COLOR>\n<GIVE_QUANTITY>{}</GIVE_QUANTITY>\n",
        i + 1,
        c.reasoning.as_deref().unwrap_or(""),
        config.color_name(o.get_color),
        o.get_qty,
        config.color_name(o.give_color),
        o.give_qty,
    )
}

/// Renders the rules followed by the role's template. Identical inputs give
/// byte-identical text.
pub fn build_prompt(
    role: PromptRole,
    obs: &Observation<'_>,
    offer: Option<(PlayerId, &Offer)>,
    candidates: Option<&[Candidate]>,
    temperature: f64,
) -> Result<PromptBundle, TemplateError> {
    let mut text = String::from(RULES);
    text.push('\n');
    let mut body = role
        .template()
        .replace("{{name}}", &player_name(obs.me))
        .replace("{{preference_description}}", &preference_description(obs))
        .replace("{{item}}", &item(obs))
        .replace("{{history}}", &render_history(obs.config, obs.history));
    if role == PromptRole::Responder {
        let (proposer, o) = offer.ok_or(TemplateError::MissingOffer)?;
        body = body
            .replace("{{proposer}}", &player_name(proposer))
            .replace("{{give}}", &chips(obs.config, o.give_color, o.give_qty))
            .replace("{{get}}", &chips(obs.config, o.get_color, o.get_qty))
            .replace("{{delta_surplus}}", &signed_dollars(obs.acceptance_delta(o)));
    }
    if role == PromptRole::RefinedSelect {
        let cs = candidates.filter(|c| !c.is_empty()).ok_or(TemplateError::MissingCandidates)?;
        let listed: String = cs.iter().enumerate().map(|(i, c)| render_candidate(obs.config, i, c)).collect();
        body = body.replace("{{proposed}}", listed.trim_end());
    }
    if let Some(start) = body.find("{{") {
        let end = body[start..].find("}}").map_or(body.len(), |e| start + e);
        return Err(TemplateError::Unfilled(body[start + 2..end].to_string()));
    }
    text.push_str(&body);
    Ok(PromptBundle { role, text, temperature })
}
