use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{myopic_response, profitable_offers, Agent, Observation};
use crate::game::{Offer, Response, TradeOffer};

/// Proposes the one-for-one swap with the smallest positive own surplus that
/// at least one opponent could pay for.
#[derive(Debug, Clone, Default)]
pub struct GreedyConcessionary;

impl GreedyConcessionary {
    pub fn new() -> Self {
        GreedyConcessionary
    }
}

impl Agent for GreedyConcessionary {
    fn kind(&self) -> &str {
        "greedy"
    }

    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer {
        let mut best: Option<(Offer, crate::money::Cents)> = None;
        for give in obs.config.color_ids() {
            let have = obs.holdings.get(obs.me, give);
            for get in obs.config.color_ids() {
                if give == get {
                    continue;
                }
                let q = have.min(obs.max_opponent_holding(get));
                for qty in 1..=q {
                    let o = Offer::new(give, qty, get, qty);
                    let d = obs.proposal_delta(&o);
                    if d.is_positive() && best.is_none_or(|(_, b)| d < b) {
                        best = Some((o, d));
                    }
                }
            }
        }
        best.map_or(TradeOffer::Pass, |(o, _)| o.into())
    }

    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response {
        myopic_response(obs, offer)
    }
}

/// Proposes uniformly among its own profitable offers.
#[derive(Debug, Clone)]
pub struct RandomRational {
    rng: ChaCha8Rng,
}

impl RandomRational {
    pub fn new(seed: u64) -> Self {
        RandomRational { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Agent for RandomRational {
    fn kind(&self) -> &str {
        "random"
    }

    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer {
        profitable_offers(obs)
            .choose(&mut self.rng)
            .map_or(TradeOffer::Pass, |&o| o.into())
    }

    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response {
        myopic_response(obs, offer)
    }
}
