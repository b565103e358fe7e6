//! Labels every proposal, acceptance and decline with a regret class, using
//! counterfactual replays of the recorded game.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::counterfactual::{counterfactual_replay, Alternative, Replay, Substitution};
use crate::game::welfare::{offer_delta_for_proposer, offer_delta_for_responder};
use crate::game::{ColorId, Offer, PlayerId, Response};
use crate::log::GameLog;
use crate::money::Cents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Proposer,
    Acceptor,
    Decliner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretKind {
    NoRegret,
    ForcedRegret,
    UnforcedRegret,
    Unscored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnscoredReason {
    /// The proposal was not executed.
    RejectedProposal,
    /// The action gave the actor zero or negative immediate surplus.
    NonPositiveSurplus,
    /// The accept could not be honored and was turned into a decline.
    CoercedAccept,
    /// The decliner could not have paid, so declining was not a choice.
    NoInventory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegretLabel {
    pub turn: u32,
    pub player: PlayerId,
    pub role: Role,
    pub label: RegretKind,
    /// Counterfactual final value minus actual final value for the focal
    /// player, under the replay that supports the label.
    pub counterfactual_gain: Cents,
    pub reason: Option<UnscoredReason>,
    /// Later turns offering the same chip at a better per-unit price.
    pub evidence: Vec<u32>,
}

/// Smallest counterfactual improvement, in cents, that counts as regret.
const MIN_GAIN: Cents = Cents(1);

pub fn classify_actions(log: &GameLog) -> Vec<RegretLabel> {
    let mut out = Vec::new();
    let n = log.header.config.n_players;
    let actual: Vec<Replay> = (0..n)
        .map(|p| counterfactual_replay(log, PlayerId(p), &[]).expect("identity replay"))
        .collect();
    for (t, rec) in log.turns.iter().enumerate() {
        let Some(&offer) = rec.offer.as_trade() else {
            continue;
        };
        let label = |player, role, label, gain, reason, evidence| RegretLabel {
            turn: rec.turn,
            player,
            role,
            label,
            counterfactual_gain: gain,
            reason,
            evidence,
        };
        let values = |p: PlayerId| log.header.valuations.row(p);

        let p = rec.proposer;
        let delta = offer_delta_for_proposer(values(p), &offer);
        out.push(if !rec.executed {
            label(p, Role::Proposer, RegretKind::Unscored, Cents::ZERO, Some(UnscoredReason::RejectedProposal), vec![])
        } else if !delta.is_positive() {
            label(p, Role::Proposer, RegretKind::Unscored, Cents::ZERO, Some(UnscoredReason::NonPositiveSurplus), vec![])
        } else {
            let target = Target { color: offer.get_color, qty: offer.get_qty, delta };
            let (kind, gain, evidence) =
                committed(log, &actual[p.0], t, p, Alternative::Pass, target);
            label(p, Role::Proposer, kind, gain, None, evidence)
        });

        for r in (0..n).map(PlayerId).filter(|&r| r != p) {
            let delta = offer_delta_for_responder(values(r), &offer);
            if rec.coerced.contains(&r) {
                out.push(label(r, Role::Acceptor, RegretKind::Unscored, Cents::ZERO, Some(UnscoredReason::CoercedAccept), vec![]));
                continue;
            }
            match rec.response_of(r) {
                Some(Response::Accept) if !delta.is_positive() => {
                    out.push(label(r, Role::Acceptor, RegretKind::Unscored, Cents::ZERO, Some(UnscoredReason::NonPositiveSurplus), vec![]));
                }
                Some(Response::Accept) => {
                    let target = Target { color: offer.give_color, qty: offer.give_qty, delta };
                    let (kind, gain, evidence) =
                        committed(log, &actual[r.0], t, r, Alternative::Decline, target);
                    out.push(label(r, Role::Acceptor, kind, gain, None, evidence));
                }
                Some(Response::Decline) => {
                    if !actual[r.0].before(t).holds(r, offer.get_color, offer.get_qty) {
                        out.push(label(r, Role::Decliner, RegretKind::Unscored, Cents::ZERO, Some(UnscoredReason::NoInventory), vec![]));
                        continue;
                    }
                    let sub = Substitution { turn: t, player: r, action: Alternative::Accept };
                    let (kind, gain) = match counterfactual_replay(log, r, &[sub]) {
                        Ok(cf) => {
                            let gain = cf.final_value - actual[r.0].final_value;
                            let kind = if gain >= MIN_GAIN { RegretKind::UnforcedRegret } else { RegretKind::NoRegret };
                            (kind, gain)
                        }
                        Err(_) => (RegretKind::NoRegret, Cents::ZERO),
                    };
                    out.push(label(r, Role::Decliner, kind, gain, None, vec![]));
                }
                None => {}
            }
        }
    }
    out
}

/// What the focal player obtained at the scored turn.
#[derive(Debug, Clone, Copy)]
struct Target {
    color: ColorId,
    qty: u32,
    delta: Cents,
}

/// Scores an action that committed chips (an executed proposal or an
/// accept). `flip` undoes the action at turn `t`.
fn committed(
    log: &GameLog,
    actual: &Replay,
    t: usize,
    me: PlayerId,
    flip: Alternative,
    target: Target,
) -> (RegretKind, Cents, Vec<u32>) {
    let undo = Substitution { turn: t, player: me, action: flip };
    let Ok(cf) = counterfactual_replay(log, me, &[undo]) else {
        return (RegretKind::NoRegret, Cents::ZERO, vec![]);
    };
    let values = log.header.valuations.row(me);
    let alternatives: Vec<(usize, Offer)> = log.turns[t + 1..]
        .iter()
        .enumerate()
        .filter_map(|(i, rec)| Some((t + 1 + i, rec.proposer, *rec.offer.as_trade()?)))
        .filter(|&(_, proposer, o)| proposer != me && o.give_color == target.color)
        .filter(|&(_, _, o)| {
            // per-unit surplus comparison, cross-multiplied
            let d = offer_delta_for_responder(values, &o);
            d.0 * target.qty as i64 > target.delta.0 * o.give_qty as i64
        })
        .map(|(u, _, o)| (u, o))
        .collect();
    let evidence: Vec<u32> = alternatives.iter().map(|&(u, _)| u as u32).collect();

    let mut best: Option<Cents> = None;
    let mut confirming = Vec::new();
    for &(u, o) in &alternatives {
        let proposer = log.turns[u].proposer;
        let blocked = !actual.before(u).holds(me, o.get_color, o.get_qty);
        let open = cf.before(u).can_execute(proposer, me, &o);
        if !(blocked && open) {
            continue;
        }
        let take = Substitution { turn: u, player: me, action: Alternative::Accept };
        if let Ok(both) = counterfactual_replay(log, me, &[undo, take]) {
            let gain = both.final_value - actual.final_value;
            if gain >= MIN_GAIN {
                confirming.push(u as u32);
                best = Some(best.map_or(gain, |b: Cents| b.max(gain)));
            }
        }
    }
    match best {
        Some(gain) => (RegretKind::ForcedRegret, gain, confirming),
        None => (RegretKind::NoRegret, cf.final_value - actual.final_value, evidence),
    }
}
