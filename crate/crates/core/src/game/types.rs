use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::state::OfferViolation;
use crate::money::Cents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0 + 1)
    }
}

/// A concrete proposal: the proposer surrenders `give_qty` chips of
/// `give_color` and receives `get_qty` chips of `get_color`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Offer {
    pub give_color: ColorId,
    pub give_qty: u32,
    pub get_color: ColorId,
    pub get_qty: u32,
}

impl Offer {
    pub fn new(give_color: ColorId, give_qty: u32, get_color: ColorId, get_qty: u32) -> Self {
        Offer { give_color, give_qty, get_color, get_qty }
    }

    /// Chips given per chip requested.
    pub fn ratio(&self) -> f64 {
        f64::from(self.give_qty) / f64::from(self.get_qty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TradeOffer {
    Pass,
    Trade(Offer),
}

impl TradeOffer {
    pub fn trade(give_color: ColorId, give_qty: u32, get_color: ColorId, get_qty: u32) -> Self {
        TradeOffer::Trade(Offer::new(give_color, give_qty, get_color, get_qty))
    }

    pub fn as_trade(&self) -> Option<&Offer> {
        match self {
            TradeOffer::Pass => None,
            TradeOffer::Trade(o) => Some(o),
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, TradeOffer::Pass)
    }
}

impl From<Offer> for TradeOffer {
    fn from(o: Offer) -> Self {
        TradeOffer::Trade(o)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Accept,
    Decline,
}

/// Per-player, per-color money value of one chip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValuationProfile(pub Vec<Vec<Cents>>);

impl ValuationProfile {
    pub fn value(&self, player: PlayerId, color: ColorId) -> Cents {
        self.0[player.0][color.0]
    }

    pub fn row(&self, player: PlayerId) -> &[Cents] {
        &self.0[player.0]
    }

    pub fn n_players(&self) -> usize {
        self.0.len()
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: i64) -> Self {
        ValuationProfile(
            self.0
                .iter()
                .map(|row| row.iter().map(|v| Cents(v.0 * factor)).collect())
                .collect(),
        )
    }
}

/// Per-player, per-color chip counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllocationMatrix(pub Vec<Vec<u32>>);

impl AllocationMatrix {
    pub fn uniform(n_players: usize, n_colors: usize, per_color: u32) -> Self {
        AllocationMatrix(vec![vec![per_color; n_colors]; n_players])
    }

    pub fn get(&self, player: PlayerId, color: ColorId) -> u32 {
        self.0[player.0][color.0]
    }

    pub fn row(&self, player: PlayerId) -> &[u32] {
        &self.0[player.0]
    }

    pub fn n_players(&self) -> usize {
        self.0.len()
    }

    pub fn n_colors(&self) -> usize {
        self.0.first().map_or(0, Vec::len)
    }

    pub fn column_sum(&self, color: ColorId) -> u64 {
        self.0.iter().map(|r| u64::from(r[color.0])).sum()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.n_colors()).map(|c| self.column_sum(ColorId(c))).collect()
    }

    /// Whether `player` holds at least `qty` chips of `color`.
    pub fn holds(&self, player: PlayerId, color: ColorId, qty: u32) -> bool {
        self.get(player, color) >= qty
    }

    /// Moves chips for an executed offer. Callers check feasibility first.
    pub fn execute(&mut self, proposer: PlayerId, acceptor: PlayerId, offer: &Offer) {
        debug_assert!(self.holds(proposer, offer.give_color, offer.give_qty));
        debug_assert!(self.holds(acceptor, offer.get_color, offer.get_qty));
        self.0[proposer.0][offer.give_color.0] -= offer.give_qty;
        self.0[acceptor.0][offer.give_color.0] += offer.give_qty;
        self.0[acceptor.0][offer.get_color.0] -= offer.get_qty;
        self.0[proposer.0][offer.get_color.0] += offer.get_qty;
    }

    /// Whether both sides of `offer` can be honored between these two players.
    pub fn can_execute(&self, proposer: PlayerId, acceptor: PlayerId, offer: &Offer) -> bool {
        self.holds(proposer, offer.give_color, offer.give_qty)
            && self.holds(acceptor, offer.get_color, offer.get_qty)
    }
}

/// One completed turn of the game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub round: u32,
    /// Global turn index, starting at 0.
    pub turn: u32,
    pub proposer: PlayerId,
    pub offer: TradeOffer,
    /// Indexed by player; `None` for the proposer. Accepts from responders
    /// lacking inventory have already been turned into declines.
    pub responses: Vec<Option<Response>>,
    /// Responders whose accept was coerced to a decline.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coerced: Vec<PlayerId>,
    pub selected_acceptor: Option<PlayerId>,
    pub executed: bool,
    /// Set when the agent's proposal was invalid and replaced by a pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid_proposal: Option<OfferViolation>,
    pub post_holdings: AllocationMatrix,
}

impl TurnRecord {
    pub fn response_of(&self, player: PlayerId) -> Option<Response> {
        self.responses.get(player.0).copied().flatten()
    }

    pub fn accepters(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.responses
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, Some(Response::Accept)))
            .map(|(i, _)| PlayerId(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn execute_moves_exactly_four_entries() {
        let mut m = AllocationMatrix::uniform(3, 3, 10);
        let before = m.clone();
        let offer = Offer::new(ColorId(0), 2, ColorId(2), 5);
        m.execute(PlayerId(1), PlayerId(2), &offer);
        let mut changed = 0;
        for p in 0..3 {
            for c in 0..3 {
                if m.0[p][c] != before.0[p][c] {
                    changed += 1;
                }
            }
        }
        assert_eq!(changed, 4);
        assert_eq!(m.row(PlayerId(1)), &[8, 10, 15]);
        assert_eq!(m.row(PlayerId(2)), &[12, 10, 5]);
        assert_eq!(m.column_sums(), before.column_sums());
    }

    #[test]
    fn ratio_is_give_over_get() {
        assert_eq!(Offer::new(ColorId(0), 2, ColorId(1), 1).ratio(), 2.0);
        assert_eq!(Offer::new(ColorId(0), 1, ColorId(1), 4).ratio(), 0.25);
    }
}
