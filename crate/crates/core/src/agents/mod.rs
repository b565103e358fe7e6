//! Agent contract and built-in agents.
//!
//! An agent sees only an [`Observation`]: its own values, public holdings and
//! the public history. Agents are driven by [`crate::play`] or by the play
//! service; they never touch the engine directly.

mod baseline;
mod bayesian;
mod belief;
mod convergence;
mod spec;

pub use baseline::{GreedyConcessionary, RandomRational};
pub use bayesian::{
    accept_prob, bayesian_propose, bayesian_respond, best_offer, BayesianAgent, BayesianOptions,
    ScoredOffer,
};
pub use belief::{BeliefState, Misspecification, OpponentBelief};
pub use convergence::{run_to_convergence, ConvergenceError, ConvergenceOutcome};
pub use spec::{AgentSpec, AgentSpecError};

use alloc::vec::Vec;

use crate::game::{
    AllocationMatrix, ColorId, GameConfig, GameState, Offer, PlayerId, Response, TradeOffer,
    TurnRecord,
};
use crate::game::welfare::{offer_delta_for_proposer, offer_delta_for_responder};
use crate::money::Cents;

/// Everything a seat may know when it acts.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub me: PlayerId,
    pub config: &'a GameConfig,
    pub my_values: &'a [Cents],
    pub holdings: &'a AllocationMatrix,
    pub history: &'a [TurnRecord],
    pub turn_order: &'a [PlayerId],
    pub round: u32,
    pub turn: u32,
}

impl<'a> Observation<'a> {
    pub fn for_player(state: &'a GameState, me: PlayerId) -> Self {
        Observation {
            me,
            config: state.config(),
            my_values: state.valuations().row(me),
            holdings: state.holdings(),
            history: state.history(),
            turn_order: state.turn_order(),
            round: state.round(),
            turn: state.turn_index() as u32,
        }
    }

    pub fn opponents(&self) -> impl Iterator<Item = PlayerId> + '_ {
        (0..self.config.n_players).map(PlayerId).filter(move |&p| p != self.me)
    }

    pub fn my_holdings(&self) -> &[u32] {
        self.holdings.row(self.me)
    }

    /// My welfare change if I propose `offer` and it executes.
    pub fn proposal_delta(&self, offer: &Offer) -> Cents {
        offer_delta_for_proposer(self.my_values, offer)
    }

    /// My welfare change if I accept `offer` and am selected.
    pub fn acceptance_delta(&self, offer: &Offer) -> Cents {
        offer_delta_for_responder(self.my_values, offer)
    }

    pub fn can_accept(&self, offer: &Offer) -> bool {
        self.holdings.holds(self.me, offer.get_color, offer.get_qty)
    }

    /// The seat whose proposal is on the table this turn.
    pub fn current_proposer(&self) -> Option<PlayerId> {
        let n = self.turn_order.len();
        (n > 0).then(|| self.turn_order[self.turn as usize % n])
    }

    /// Largest stock of `color` held by any opponent.
    pub fn max_opponent_holding(&self, color: ColorId) -> u32 {
        self.opponents()
            .map(|p| self.holdings.get(p, color))
            .max()
            .unwrap_or(0)
    }
}

/// A completed turn as seen by every seat, with the public holdings that were
/// in force when it was played.
#[derive(Debug, Clone, Copy)]
pub struct ObservedTurn<'a> {
    pub record: &'a TurnRecord,
    pub pre_holdings: &'a AllocationMatrix,
}

pub trait Agent {
    /// Short label such as `bayesian`.
    fn kind(&self) -> &str;

    /// Called on this seat's scheduled turn.
    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer;

    /// Called when another seat proposed `offer`.
    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response;

    /// Called once per completed turn, for every seat.
    fn observe(&mut self, _turn: &ObservedTurn<'_>) {}
}

impl<A: Agent + ?Sized> Agent for alloc::boxed::Box<A> {
    fn kind(&self) -> &str {
        (**self).kind()
    }
    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer {
        (**self).propose(obs)
    }
    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response {
        (**self).respond(obs, offer)
    }
    fn observe(&mut self, turn: &ObservedTurn<'_>) {
        (**self).observe(turn)
    }
}

/// Accept exactly when the trade is affordable and strictly profitable.
pub fn myopic_response(obs: &Observation<'_>, offer: &Offer) -> Response {
    if obs.can_accept(offer) && obs.acceptance_delta(offer).is_positive() {
        Response::Accept
    } else {
        Response::Decline
    }
}

/// All offers the observer could legally make with strictly positive own
/// surplus, asking at most what the richest opponent holds, in lexicographic
/// order of (give color, get color, give qty, get qty).
pub fn profitable_offers(obs: &Observation<'_>) -> Vec<Offer> {
    let mut out = Vec::new();
    for give in obs.config.color_ids() {
        let have = obs.holdings.get(obs.me, give);
        for get in obs.config.color_ids() {
            if give == get {
                continue;
            }
            let max_get = obs.max_opponent_holding(get);
            for x in 1..=have {
                for y in 1..=max_get {
                    let o = Offer::new(give, x, get, y);
                    if obs.proposal_delta(&o).is_positive() {
                        out.push(o);
                    }
                }
            }
        }
    }
    out
}
