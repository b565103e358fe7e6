use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, GameConfig};
use super::types::{
    AllocationMatrix, PlayerId, Response, TradeOffer, TurnRecord, ValuationProfile,
};
use crate::money::Cents;

/// Why a proposal is not legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OfferViolation {
    #[error("cannot trade chips of the same color")]
    SameColor,
    #[error("cannot offer more chips than currently held")]
    InsufficientInventory,
    #[error("quantities must be at least 1")]
    NonPositiveQty,
    #[error("not this player's turn to propose")]
    OutOfTurn,
    #[error("unknown color")]
    UnknownColor,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("the game is over")]
    GameOver,
    #[error("invalid offer: {0}")]
    InvalidOffer(OfferViolation),
    #[error("the proposer {0} cannot respond to its own offer")]
    ResponseFromProposer(PlayerId),
    #[error("missing response from {0}")]
    MissingResponse(PlayerId),
    #[error("expected {expected} response slots, got {got}")]
    ResponseArity { expected: usize, got: usize },
}

/// The full engine state. Valuations are private to each player; holdings and
/// history are public.
///
/// Randomness comes from a single ChaCha8 stream seeded with
/// `config.rng_seed` and consumed in a fixed order: private values
/// (player-major, colors in configuration order), then the turn-order
/// shuffle, then one draw per turn that has two or more accepters.
#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    valuations: ValuationProfile,
    initial: AllocationMatrix,
    holdings: AllocationMatrix,
    turn_order: Vec<PlayerId>,
    history: Vec<TurnRecord>,
    rng: ChaCha8Rng,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let (rng, valuations, turn_order) = draw_setup(&config);
        let initial = AllocationMatrix::uniform(
            config.n_players,
            config.n_colors(),
            config.endowment_per_color,
        );
        Ok(GameState {
            holdings: initial.clone(),
            initial,
            valuations,
            turn_order,
            history: Vec::new(),
            rng,
            config,
        })
    }

    /// Rebuilds a game from a recorded setup. The random stream is advanced
    /// past the setup draws exactly as [`GameState::new`] would, so per-turn
    /// acceptor selection matches a freshly generated game with the same seed.
    pub fn from_setup(
        config: GameConfig,
        valuations: ValuationProfile,
        initial: AllocationMatrix,
        turn_order: Vec<PlayerId>,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let n = config.n_players;
        let k = config.n_colors();
        if valuations.0.len() != n || valuations.0.iter().any(|r| r.len() != k) {
            return Err(ConfigError::Shape("valuation matrix does not match config"));
        }
        if initial.0.len() != n || initial.0.iter().any(|r| r.len() != k) {
            return Err(ConfigError::Shape("allocation matrix does not match config"));
        }
        let mut seen = vec![false; n];
        for p in &turn_order {
            if p.0 >= n || seen[p.0] {
                return Err(ConfigError::Shape("turn order is not a permutation"));
            }
            seen[p.0] = true;
        }
        if turn_order.len() != n {
            return Err(ConfigError::Shape("turn order is not a permutation"));
        }
        let (rng, _, _) = draw_setup(&config);
        Ok(GameState {
            holdings: initial.clone(),
            initial,
            valuations,
            turn_order,
            history: Vec::new(),
            rng,
            config,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn valuations(&self) -> &ValuationProfile {
        &self.valuations
    }

    pub fn holdings(&self) -> &AllocationMatrix {
        &self.holdings
    }

    pub fn initial_holdings(&self) -> &AllocationMatrix {
        &self.initial
    }

    pub fn turn_order(&self) -> &[PlayerId] {
        &self.turn_order
    }

    pub fn history(&self) -> &[TurnRecord] {
        &self.history
    }

    pub fn turn_index(&self) -> usize {
        self.history.len()
    }

    pub fn round(&self) -> u32 {
        (self.history.len() / self.config.n_players) as u32
    }

    pub fn is_terminal(&self) -> bool {
        self.history.len() >= self.config.total_turns()
    }

    /// The scheduled proposer, or `None` once the game is over.
    pub fn current_proposer(&self) -> Option<PlayerId> {
        if self.is_terminal() {
            None
        } else {
            Some(self.turn_order[self.history.len() % self.config.n_players])
        }
    }

    pub fn responders(&self) -> Vec<PlayerId> {
        let proposer = self.current_proposer();
        (0..self.config.n_players)
            .map(PlayerId)
            .filter(|&p| Some(p) != proposer)
            .collect()
    }

    /// Checks a proposal against the proposer's own inventory. Whether any
    /// responder can afford the request is deliberately not checked.
    pub fn validate_offer(&self, proposer: PlayerId, offer: &TradeOffer) -> Result<(), OfferViolation> {
        if self.current_proposer() != Some(proposer) {
            return Err(OfferViolation::OutOfTurn);
        }
        check_offer(&self.config, &self.holdings, proposer, offer)
    }

    pub fn responder_can_accept(&self, responder: PlayerId, offer: &TradeOffer) -> bool {
        match offer {
            TradeOffer::Pass => false,
            TradeOffer::Trade(o) => self.holdings.holds(responder, o.get_color, o.get_qty),
        }
    }

    /// Resolves the current turn. `responses` is indexed by player and must
    /// hold `None` exactly at the proposer.
    pub fn apply_turn(
        &mut self,
        offer: &TradeOffer,
        responses: &[Option<Response>],
    ) -> Result<&TurnRecord, ProtocolError> {
        let proposer = self.current_proposer().ok_or(ProtocolError::GameOver)?;
        check_offer(&self.config, &self.holdings, proposer, offer)
            .map_err(ProtocolError::InvalidOffer)?;
        let n = self.config.n_players;
        if responses.len() != n {
            return Err(ProtocolError::ResponseArity { expected: n, got: responses.len() });
        }
        for (i, r) in responses.iter().enumerate() {
            let p = PlayerId(i);
            match (p == proposer, r) {
                (true, Some(_)) => return Err(ProtocolError::ResponseFromProposer(p)),
                (false, None) => return Err(ProtocolError::MissingResponse(p)),
                _ => {}
            }
        }

        let mut recorded: Vec<Option<Response>> = responses.to_vec();
        let mut coerced = Vec::new();
        for (i, r) in recorded.iter_mut().enumerate() {
            if *r == Some(Response::Accept) && !self.responder_can_accept(PlayerId(i), offer) {
                *r = Some(Response::Decline);
                // a pass has nothing to accept; that is not worth a flag
                if !offer.is_pass() {
                    coerced.push(PlayerId(i));
                }
            }
        }
        let accepters: Vec<PlayerId> = recorded
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Some(Response::Accept))
            .map(|(i, _)| PlayerId(i))
            .collect();
        let selected = match accepters.len() {
            0 => None,
            1 => Some(accepters[0]),
            len => Some(accepters[self.rng.gen_range(0..len)]),
        };
        if let (Some(acceptor), TradeOffer::Trade(o)) = (selected, offer) {
            self.holdings.execute(proposer, acceptor, o);
        }
        let turn = self.history.len() as u32;
        self.history.push(TurnRecord {
            round: turn / n as u32,
            turn,
            proposer,
            offer: *offer,
            responses: recorded,
            coerced,
            selected_acceptor: selected,
            executed: selected.is_some(),
            invalid_proposal: None,
            post_holdings: self.holdings.clone(),
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Marks the most recent turn as one whose original proposal was invalid.
    pub fn flag_invalid_proposal(&mut self, violation: OfferViolation) {
        if let Some(last) = self.history.last_mut() {
            last.invalid_proposal = Some(violation);
        }
    }

    /// Holdings before the given turn was played.
    pub fn holdings_before(&self, turn: usize) -> &AllocationMatrix {
        if turn == 0 {
            &self.initial
        } else {
            &self.history[turn - 1].post_holdings
        }
    }
}

/// Checks an offer against the proposer's inventory, ignoring turn order.
pub fn check_offer(
    config: &GameConfig,
    holdings: &AllocationMatrix,
    proposer: PlayerId,
    offer: &TradeOffer,
) -> Result<(), OfferViolation> {
    let o = match offer {
        TradeOffer::Pass => return Ok(()),
        TradeOffer::Trade(o) => o,
    };
    if o.give_color.0 >= config.n_colors() || o.get_color.0 >= config.n_colors() {
        return Err(OfferViolation::UnknownColor);
    }
    if o.give_color == o.get_color {
        return Err(OfferViolation::SameColor);
    }
    if o.give_qty == 0 || o.get_qty == 0 {
        return Err(OfferViolation::NonPositiveQty);
    }
    if !holdings.holds(proposer, o.give_color, o.give_qty) {
        return Err(OfferViolation::InsufficientInventory);
    }
    Ok(())
}

fn draw_setup(config: &GameConfig) -> (ChaCha8Rng, ValuationProfile, Vec<PlayerId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let grid = config.value_grid();
    let valuations = (0..config.n_players)
        .map(|_| {
            config
                .color_ids()
                .map(|c| {
                    if c == config.numeraire {
                        config.numeraire_value
                    } else {
                        grid[rng.gen_range(0..grid.len())]
                    }
                })
                .collect::<Vec<Cents>>()
        })
        .collect();
    let mut turn_order: Vec<PlayerId> = (0..config.n_players).map(PlayerId).collect();
    turn_order.shuffle(&mut rng);
    (rng, ValuationProfile(valuations), turn_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{surplus_gain, ColorId};
    use alloc::vec;

    const G: ColorId = ColorId(0);
    const R: ColorId = ColorId(1);

    fn responses_for(state: &GameState, r: Response) -> Vec<Option<Response>> {
        let proposer = state.current_proposer().unwrap();
        (0..state.config().n_players)
            .map(|p| if PlayerId(p) == proposer { None } else { Some(r) })
            .collect()
    }

    #[test]
    fn new_game_two_chip_endowment() {
        let state = GameState::new(GameConfig::variant(2, 7)).unwrap();
        for p in 0..3 {
            assert_eq!(state.holdings().row(PlayerId(p)), &[10, 10]);
            assert_eq!(state.valuations().value(PlayerId(p), G), Cents(50));
            assert!(state.config().on_grid(state.valuations().value(PlayerId(p), R)));
        }
        let mut order: Vec<usize> = state.turn_order().iter().map(|p| p.0).collect();
        order.sort();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn same_seed_same_setup() {
        let a = GameState::new(GameConfig::variant(4, 99)).unwrap();
        let b = GameState::new(GameConfig::variant(4, 99)).unwrap();
        assert_eq!(a.valuations(), b.valuations());
        assert_eq!(a.turn_order(), b.turn_order());
    }

    #[test]
    fn zero_endowment_makes_every_trade_invalid() {
        let mut cfg = GameConfig::variant(3, 1);
        cfg.endowment_per_color = 0;
        let state = GameState::new(cfg).unwrap();
        let p = state.current_proposer().unwrap();
        for give in 0..3 {
            for get in 0..3 {
                let offer = TradeOffer::trade(ColorId(give), 1, ColorId(get), 1);
                assert!(state.validate_offer(p, &offer).is_err());
            }
        }
        assert_eq!(state.validate_offer(p, &TradeOffer::Pass), Ok(()));
    }

    #[test]
    fn invalid_config_is_an_error() {
        let mut cfg = GameConfig::variant(2, 0);
        cfg.rounds = 0;
        assert_eq!(GameState::new(cfg).unwrap_err(), ConfigError::NoRounds);
    }

    #[test]
    fn validate_offer_reason_codes() {
        let mut state = GameState::new(GameConfig::variant(2, 3)).unwrap();
        let p = state.current_proposer().unwrap();
        let other = state.responders()[0];
        // make the proposer hold 5 red by a direct trade setup
        state.holdings.0[p.0][R.0] = 5;
        assert_eq!(
            state.validate_offer(p, &TradeOffer::trade(R, 6, G, 1)),
            Err(OfferViolation::InsufficientInventory)
        );
        assert_eq!(state.validate_offer(p, &TradeOffer::trade(R, 5, G, 1)), Ok(()));
        assert_eq!(
            state.validate_offer(p, &TradeOffer::trade(R, 1, R, 1)),
            Err(OfferViolation::SameColor)
        );
        assert_eq!(
            state.validate_offer(p, &TradeOffer::trade(R, 0, G, 1)),
            Err(OfferViolation::NonPositiveQty)
        );
        assert_eq!(
            state.validate_offer(other, &TradeOffer::Pass),
            Err(OfferViolation::OutOfTurn)
        );
        // asking for more than anyone holds is legal
        assert_eq!(state.validate_offer(p, &TradeOffer::trade(G, 1, R, 99)), Ok(()));
    }

    #[test]
    fn responder_feasibility() {
        let mut state = GameState::new(GameConfig::variant(3, 3)).unwrap();
        let r = state.responders()[0];
        let blue = ColorId(2);
        state.holdings.0[r.0][blue.0] = 3;
        assert!(!state.responder_can_accept(r, &TradeOffer::trade(G, 1, blue, 4)));
        assert!(state.responder_can_accept(r, &TradeOffer::trade(G, 1, blue, 3)));
        assert!(!state.responder_can_accept(r, &TradeOffer::Pass));
    }

    #[test]
    fn both_decline_is_a_no_trade_turn() {
        let mut state = GameState::new(GameConfig::variant(2, 5)).unwrap();
        let before = state.holdings().clone();
        let resp = responses_for(&state, Response::Decline);
        let rec = state.apply_turn(&TradeOffer::trade(G, 1, R, 1), &resp).unwrap();
        assert!(!rec.executed);
        assert_eq!(rec.selected_acceptor, None);
        assert_eq!(state.holdings(), &before);
        assert_eq!(surplus_gain(&state).total, Cents::ZERO);
    }

    #[test]
    fn single_accepter_trades_with_certainty() {
        for seed in 0..20 {
            let mut state = GameState::new(GameConfig::variant(2, seed)).unwrap();
            let rs = state.responders();
            let mut resp = responses_for(&state, Response::Decline);
            resp[rs[1].0] = Some(Response::Accept);
            let rec = state.apply_turn(&TradeOffer::trade(G, 1, R, 2), &resp).unwrap();
            assert_eq!(rec.selected_acceptor, Some(rs[1]));
            assert!(rec.executed);
        }
    }

    #[test]
    fn double_accept_splits_roughly_evenly() {
        let mut first = 0;
        let n = 2000;
        for seed in 0..n {
            let mut state = GameState::new(GameConfig::variant(2, seed)).unwrap();
            let rs = state.responders();
            let resp = responses_for(&state, Response::Accept);
            let rec = state.apply_turn(&TradeOffer::trade(G, 1, R, 1), &resp).unwrap();
            let sel = rec.selected_acceptor.unwrap();
            assert!(rs.contains(&sel));
            if sel == rs[0] {
                first += 1;
            }
        }
        let frac = first as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.05, "fraction {frac}");
    }

    #[test]
    fn infeasible_accept_is_coerced_and_flagged() {
        let mut state = GameState::new(GameConfig::variant(2, 11)).unwrap();
        let rs = state.responders();
        let resp = responses_for(&state, Response::Accept);
        // nobody holds 11 red
        let rec = state.apply_turn(&TradeOffer::trade(G, 1, R, 11), &resp).unwrap();
        assert!(!rec.executed);
        assert_eq!(rec.coerced, rs);
        assert!(rec.responses.iter().flatten().all(|r| *r == Response::Decline));
    }

    #[test]
    fn protocol_errors() {
        let mut state = GameState::new(GameConfig::variant(2, 1)).unwrap();
        let p = state.current_proposer().unwrap();
        let mut resp = responses_for(&state, Response::Decline);
        resp[p.0] = Some(Response::Accept);
        assert_eq!(
            state.apply_turn(&TradeOffer::Pass, &resp).unwrap_err(),
            ProtocolError::ResponseFromProposer(p)
        );
        let mut resp = responses_for(&state, Response::Decline);
        let r = state.responders()[1];
        resp[r.0] = None;
        assert_eq!(
            state.apply_turn(&TradeOffer::Pass, &resp).unwrap_err(),
            ProtocolError::MissingResponse(r)
        );
        assert!(matches!(
            state.apply_turn(&TradeOffer::Pass, &[None]).unwrap_err(),
            ProtocolError::ResponseArity { .. }
        ));
    }

    #[test]
    fn game_ends_after_rounds_times_players() {
        let mut state = GameState::new(GameConfig::variant(3, 2)).unwrap();
        let mut proposers = Vec::new();
        while let Some(p) = state.current_proposer() {
            proposers.push(p);
            let resp = responses_for(&state, Response::Decline);
            state.apply_turn(&TradeOffer::Pass, &resp).unwrap();
        }
        assert_eq!(proposers.len(), 9);
        for round in proposers.chunks(3) {
            assert_eq!(round, state.turn_order());
        }
        let resp = vec![None, Some(Response::Decline), Some(Response::Decline)];
        assert_eq!(state.apply_turn(&TradeOffer::Pass, &resp).unwrap_err(), ProtocolError::GameOver);
    }

    #[test]
    fn one_trade_surplus_gain() {
        // proposer gives 1 green (0.50) and gets 2 red valued 0.80 each
        let cfg = GameConfig::variant(2, 0);
        let vals = ValuationProfile(vec![
            vec![Cents(50), Cents(80)],
            vec![Cents(50), Cents(20)],
            vec![Cents(50), Cents(30)],
        ]);
        let order = vec![PlayerId(0), PlayerId(1), PlayerId(2)];
        let mut state =
            GameState::from_setup(cfg, vals, AllocationMatrix::uniform(3, 2, 10), order).unwrap();
        let resp = vec![None, Some(Response::Accept), Some(Response::Decline)];
        state.apply_turn(&TradeOffer::trade(G, 1, R, 2), &resp).unwrap();
        let gain = surplus_gain(&state);
        assert_eq!(gain.per_player[0], Cents(110));
        assert_eq!(gain.per_player[1], Cents(50 - 40));
        assert_eq!(gain.total, Cents(120));
    }

    #[test]
    fn from_setup_rejects_bad_turn_order() {
        let cfg = GameConfig::variant(2, 0);
        let vals = ValuationProfile(vec![vec![Cents(50), Cents(80)]; 3]);
        let bad = vec![PlayerId(0), PlayerId(0), PlayerId(2)];
        assert!(GameState::from_setup(cfg, vals, AllocationMatrix::uniform(3, 2, 10), bad).is_err());
    }

    #[test]
    fn from_setup_matches_fresh_game_selection_stream() {
        let fresh = GameState::new(GameConfig::variant(3, 42)).unwrap();
        let mut a = fresh.clone();
        let mut b = GameState::from_setup(
            fresh.config().clone(),
            fresh.valuations().clone(),
            fresh.initial_holdings().clone(),
            fresh.turn_order().to_vec(),
        )
        .unwrap();
        while !a.is_terminal() {
            let resp = responses_for(&a, Response::Accept);
            let ra = a.apply_turn(&TradeOffer::trade(G, 1, ColorId(1), 1), &resp).unwrap().clone();
            let rb = b.apply_turn(&TradeOffer::trade(G, 1, ColorId(1), 1), &resp).unwrap().clone();
            assert_eq!(ra, rb);
        }
    }
}
