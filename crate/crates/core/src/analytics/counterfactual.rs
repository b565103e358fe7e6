//! Replays a recorded game with some decisions changed. Everything else that
//! was recorded is kept: a later trade still executes if its proposer and an
//! accepter can still honor it, and is dropped otherwise.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{welfare, AllocationMatrix, PlayerId, Response, TradeOffer};
use crate::log::GameLog;
use crate::money::Cents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// A responder declines instead.
    Decline,
    /// A responder accepts instead and is the one selected.
    Accept,
    /// The proposer passes instead.
    Pass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub turn: usize,
    pub player: PlayerId,
    pub action: Alternative,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("turn {0} is not in the log")]
    NoSuchTurn(usize),
    #[error("{player} did not propose on turn {turn}")]
    NotProposer { turn: usize, player: PlayerId },
    #[error("{player} was not a responder on turn {turn}")]
    NotResponder { turn: usize, player: PlayerId },
    #[error("turn {0} was a pass; there is nothing to accept")]
    NothingToAccept(usize),
    #[error("{player} cannot honor the offer of turn {turn} in the counterfactual")]
    Infeasible { turn: usize, player: PlayerId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    /// Focal player's welfare before the first turn and after every turn.
    pub path: Vec<Cents>,
    pub final_value: Cents,
    /// Holdings before each turn, then the final holdings.
    pub holdings: Vec<AllocationMatrix>,
    /// Turns whose recorded trade could no longer be honored.
    pub dropped: Vec<usize>,
}

impl Replay {
    pub fn before(&self, turn: usize) -> &AllocationMatrix {
        &self.holdings[turn]
    }
}

pub fn counterfactual_replay(
    log: &GameLog,
    focal: PlayerId,
    subs: &[Substitution],
) -> Result<Replay, ReplayError> {
    for s in subs {
        let rec = log.turns.get(s.turn).ok_or(ReplayError::NoSuchTurn(s.turn))?;
        match s.action {
            Alternative::Pass if rec.proposer != s.player => {
                return Err(ReplayError::NotProposer { turn: s.turn, player: s.player });
            }
            Alternative::Accept | Alternative::Decline if rec.proposer == s.player => {
                return Err(ReplayError::NotResponder { turn: s.turn, player: s.player });
            }
            Alternative::Accept if rec.offer.is_pass() => {
                return Err(ReplayError::NothingToAccept(s.turn));
            }
            _ => {}
        }
    }

    let values = log.header.valuations.row(focal);
    let value_of = |h: &AllocationMatrix| -> Cents {
        h.row(focal).iter().zip(values).map(|(&q, &v)| v * q).sum()
    };
    let mut holdings = log.header.initial_holdings.clone();
    let mut path = Vec::with_capacity(log.turns.len() + 1);
    let mut before = Vec::with_capacity(log.turns.len() + 1);
    let mut dropped = Vec::new();
    path.push(value_of(&holdings));

    for (t, rec) in log.turns.iter().enumerate() {
        before.push(holdings.clone());
        let here = || subs.iter().filter(move |s| s.turn == t);
        let offer = match rec.offer {
            TradeOffer::Trade(o) if !here().any(|s| s.action == Alternative::Pass) => Some(o),
            _ => None,
        };
        if let Some(o) = offer {
            let forced = here().find(|s| s.action == Alternative::Accept).map(|s| s.player);
            let selected = if let Some(p) = forced {
                if !holdings.can_execute(rec.proposer, p, &o) {
                    return Err(ReplayError::Infeasible { turn: t, player: p });
                }
                Some(p)
            } else {
                let declined = |p: PlayerId| {
                    here().any(|s| s.action == Alternative::Decline && s.player == p)
                };
                let willing: Vec<PlayerId> = rec
                    .responses
                    .iter()
                    .enumerate()
                    .map(|(i, _)| PlayerId(i))
                    .filter(|&p| {
                        rec.response_of(p) == Some(Response::Accept) || rec.coerced.contains(&p)
                    })
                    .filter(|&p| !declined(p))
                    .collect();
                let ok = |p: &PlayerId| holdings.can_execute(rec.proposer, *p, &o);
                rec.selected_acceptor
                    .filter(|p| willing.contains(p) && ok(p))
                    .or_else(|| willing.iter().copied().find(ok))
            };
            match selected {
                Some(p) => holdings.execute(rec.proposer, p, &o),
                None if rec.executed && here().next().is_none() => dropped.push(t),
                None => {}
            }
        }
        path.push(value_of(&holdings));
    }
    before.push(holdings.clone());
    let final_value = welfare(&log.header.valuations, &holdings, focal);
    Ok(Replay { path, final_value, holdings: before, dropped })
}

/// The focal player's recorded welfare path.
pub fn recorded_path(log: &GameLog, focal: PlayerId) -> Vec<Cents> {
    let v = &log.header.valuations;
    core::iter::once(welfare(v, &log.header.initial_holdings, focal))
        .chain(log.turns.iter().map(|r| welfare(v, &r.post_holdings, focal)))
        .collect()
}
