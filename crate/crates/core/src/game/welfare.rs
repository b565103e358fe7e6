use alloc::vec::Vec;

use thiserror::Error;

use super::types::{AllocationMatrix, Offer, PlayerId, TradeOffer, ValuationProfile};
use super::GameState;
use crate::money::Cents;

/// Sum over colors of value times holdings for one player.
pub fn welfare(valuations: &ValuationProfile, holdings: &AllocationMatrix, player: PlayerId) -> Cents {
    valuations
        .row(player)
        .iter()
        .zip(holdings.row(player))
        .map(|(&v, &a)| v * a)
        .sum()
}

pub fn total_welfare(valuations: &ValuationProfile, holdings: &AllocationMatrix) -> Cents {
    (0..holdings.n_players())
        .map(|p| welfare(valuations, holdings, PlayerId(p)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurplusGain {
    pub per_player: Vec<Cents>,
    pub total: Cents,
}

/// Welfare change of every player since the start of the game.
pub fn surplus_gain(state: &GameState) -> SurplusGain {
    let per_player: Vec<Cents> = (0..state.config().n_players)
        .map(|p| {
            let p = PlayerId(p);
            welfare(state.valuations(), state.holdings(), p)
                - welfare(state.valuations(), state.initial_holdings(), p)
        })
        .collect();
    let total = per_player.iter().copied().sum();
    SurplusGain { per_player, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("a pass has no welfare delta")]
pub struct PassOffer;

/// Welfare change of the proposer if the offer executes.
pub fn proposer_delta(
    valuations: &ValuationProfile,
    proposer: PlayerId,
    offer: &TradeOffer,
) -> Result<Cents, PassOffer> {
    let o = offer.as_trade().ok_or(PassOffer)?;
    Ok(offer_delta_for_proposer(valuations.row(proposer), o))
}

/// Welfare change of an acceptor if the offer executes with them.
pub fn responder_delta(
    valuations: &ValuationProfile,
    responder: PlayerId,
    offer: &TradeOffer,
) -> Result<Cents, PassOffer> {
    let o = offer.as_trade().ok_or(PassOffer)?;
    Ok(offer_delta_for_responder(valuations.row(responder), o))
}

pub(crate) fn offer_delta_for_proposer(values: &[Cents], o: &Offer) -> Cents {
    values[o.get_color.0] * o.get_qty - values[o.give_color.0] * o.give_qty
}

pub(crate) fn offer_delta_for_responder(values: &[Cents], o: &Offer) -> Cents {
    -offer_delta_for_proposer(values, o)
}
