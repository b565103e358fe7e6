//! Belief-based proposer: picks the offer maximizing own surplus times the
//! probability that at least one opponent accepts, and prunes beliefs after
//! every observed decision.

use alloc::vec::Vec;

use super::belief::{BeliefState, Misspecification, OpponentBelief};
use super::{myopic_response, Agent, Observation, ObservedTurn};
use crate::game::welfare::{offer_delta_for_proposer, offer_delta_for_responder};
use crate::game::{AllocationMatrix, Offer, PlayerId, Response, TradeOffer};
use crate::money::Cents;

/// Relative tolerance under which two expected payoffs count as tied.
const TIE_EPS: f64 = 1e-9;

/// `(value_a, value_b, mass)` cells for one opponent.
type PairMarginal = Vec<(Cents, Cents, f64)>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredOffer {
    pub offer: Offer,
    pub delta: Cents,
    /// Probability that at least one considered responder accepts.
    pub accept_any: f64,
    /// Expected surplus in cents.
    pub score: f64,
}

/// Probability, under `belief`, that its opponent would accept `offer`.
/// Zero when the opponent cannot hand over the requested chips.
pub fn accept_prob(belief: &OpponentBelief, offer: &Offer, holdings: &AllocationMatrix) -> f64 {
    if !holdings.holds(belief.opponent(), offer.get_color, offer.get_qty) {
        return 0.0;
    }
    belief.accepting_mass(offer)
}

/// Best offer against the given responders, or `None` if every candidate has
/// zero expected payoff. Candidates are scanned in lexicographic order of
/// (give color, get color, give qty, get qty) and only a strictly better
/// score replaces the incumbent.
pub fn best_offer(
    obs: &Observation<'_>,
    belief: &BeliefState,
    responders: &[PlayerId],
) -> Option<ScoredOffer> {
    let mut best: Option<ScoredOffer> = None;
    for give in obs.config.color_ids() {
        let have = obs.holdings.get(obs.me, give);
        if have == 0 {
            continue;
        }
        for get in obs.config.color_ids() {
            if give == get {
                continue;
            }
            let max_get = responders
                .iter()
                .map(|&j| obs.holdings.get(j, get))
                .max()
                .unwrap_or(0);
            if max_get == 0 {
                continue;
            }
            let marginals: Vec<(u32, PairMarginal)> = responders
                .iter()
                .filter_map(|&j| belief.opponent(j).map(|b| (obs.holdings.get(j, get), b)))
                .map(|(stock, b)| (stock, b.pair_marginal(give, get)))
                .collect();
            let v_give = obs.my_values[give.0];
            let v_get = obs.my_values[get.0];
            for x in 1..=have {
                for y in 1..=max_get {
                    let delta = v_get * y - v_give * x;
                    if !delta.is_positive() {
                        continue;
                    }
                    let mut none_accepts = 1.0;
                    for (stock, cells) in &marginals {
                        if *stock < y {
                            continue;
                        }
                        let p: f64 = cells
                            .iter()
                            .filter(|(vg, vr, _)| (*vg * x - *vr * y).is_positive())
                            .map(|(_, _, m)| m)
                            .sum();
                        none_accepts *= 1.0 - p;
                    }
                    let accept_any = 1.0 - none_accepts;
                    let score = delta.0 as f64 * accept_any;
                    if score <= 0.0 {
                        continue;
                    }
                    let better = match &best {
                        None => true,
                        Some(b) => score > b.score + TIE_EPS * b.score.abs().max(1.0),
                    };
                    if better {
                        best = Some(ScoredOffer {
                            offer: Offer::new(give, x, get, y),
                            delta,
                            accept_any,
                            score,
                        });
                    }
                }
            }
        }
    }
    best
}

/// The Bayesian proposal for the observing seat against all opponents.
pub fn bayesian_propose(obs: &Observation<'_>, belief: &BeliefState) -> TradeOffer {
    let responders: Vec<PlayerId> = obs.opponents().collect();
    best_offer(obs, belief, &responders).map_or(TradeOffer::Pass, |s| s.offer.into())
}

/// Myopic acceptance in the responder's true values.
pub fn bayesian_respond(obs: &Observation<'_>, offer: &Offer) -> Response {
    myopic_response(obs, offer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BayesianOptions {
    /// Also prune an opponent's belief when it proposes, keeping only values
    /// under which its proposal was profitable to itself. Only sound when the
    /// opponents are themselves rational proposers.
    pub prune_on_proposals: bool,
}

impl Default for BayesianOptions {
    fn default() -> Self {
        BayesianOptions { prune_on_proposals: true }
    }
}

#[derive(Debug, Clone)]
pub struct BayesianAgent {
    belief: BeliefState,
    options: BayesianOptions,
    misspecifications: Vec<Misspecification>,
}

impl BayesianAgent {
    pub fn new(config: &crate::game::GameConfig, me: PlayerId, options: BayesianOptions) -> Self {
        BayesianAgent {
            belief: BeliefState::uniform(config, me),
            options,
            misspecifications: Vec::new(),
        }
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    pub fn misspecifications(&self) -> &[Misspecification] {
        &self.misspecifications
    }

    /// Applies the pruning rules for one observed turn.
    pub fn update(&mut self, turn: &ObservedTurn<'_>) {
        let rec = turn.record;
        let offer = match rec.offer.as_trade() {
            Some(o) => *o,
            None => return,
        };
        let me = self.belief.me();
        let n = rec.responses.len();
        for j in (0..n).map(PlayerId).filter(|&j| j != me) {
            let rule = if j == rec.proposer {
                self.options.prune_on_proposals.then_some(Evidence::Proposed)
            } else if rec.coerced.contains(&j) {
                None
            } else {
                match rec.response_of(j) {
                    None => None,
                    Some(Response::Accept) => Some(Evidence::Accepted),
                    // a decline forced by missing inventory says nothing
                    Some(Response::Decline) => turn
                        .pre_holdings
                        .holds(j, offer.get_color, offer.get_qty)
                        .then_some(Evidence::Declined),
                }
            };
            let (Some(rule), Some(b)) = (rule, self.belief.opponent_mut(j)) else {
                continue;
            };
            if !b.retain(|v| rule.consistent(v, &offer)) {
                self.misspecifications.push(Misspecification { turn: rec.turn, opponent: j });
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Evidence {
    Proposed,
    Accepted,
    Declined,
}

impl Evidence {
    fn consistent(self, values: &[Cents], offer: &Offer) -> bool {
        match self {
            Evidence::Proposed => offer_delta_for_proposer(values, offer).is_positive(),
            Evidence::Accepted => offer_delta_for_responder(values, offer).is_positive(),
            Evidence::Declined => !offer_delta_for_responder(values, offer).is_positive(),
        }
    }
}

impl Agent for BayesianAgent {
    fn kind(&self) -> &str {
        "bayesian"
    }

    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer {
        bayesian_propose(obs, &self.belief)
    }

    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response {
        bayesian_respond(obs, offer)
    }

    fn observe(&mut self, turn: &ObservedTurn<'_>) {
        self.update(turn);
    }
}
