//! Drives agents through a game.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::agents::{
    Agent, AgentSpec, BayesianAgent, BayesianOptions, GreedyConcessionary, Observation,
    ObservedTurn, RandomRational,
};
use crate::game::{
    GameConfig, GameState, OfferViolation, PlayerId, ProtocolError, Response, TradeOffer,
    TurnRecord,
};

/// Asks the current proposer for an offer. An illegal offer is replaced by a
/// pass and the violation returned alongside it.
pub fn propose_checked<A: Agent + ?Sized>(
    state: &GameState,
    agent: &mut A,
) -> Result<(TradeOffer, Option<OfferViolation>), ProtocolError> {
    let proposer = state.current_proposer().ok_or(ProtocolError::GameOver)?;
    let offer = agent.propose(&Observation::for_player(state, proposer));
    Ok(match state.validate_offer(proposer, &offer) {
        Ok(()) => (offer, None),
        Err(v) => (TradeOffer::Pass, Some(v)),
    })
}

/// Collects one simultaneous response per non-proposer. Nobody is asked
/// about a pass.
pub fn collect_responses<A: Agent>(
    state: &GameState,
    offer: &TradeOffer,
    agents: &mut [A],
) -> Vec<Option<Response>> {
    let proposer = state.current_proposer();
    (0..state.config().n_players)
        .map(PlayerId)
        .map(|p| {
            if Some(p) == proposer {
                return None;
            }
            Some(match offer {
                TradeOffer::Pass => Response::Decline,
                TradeOffer::Trade(o) => agents[p.0].respond(&Observation::for_player(state, p), o),
            })
        })
        .collect()
}

/// Applies a resolved turn and lets every seat observe it.
pub fn commit_turn<A: Agent>(
    state: &mut GameState,
    offer: &TradeOffer,
    responses: &[Option<Response>],
    violation: Option<OfferViolation>,
    agents: &mut [A],
) -> Result<TurnRecord, ProtocolError> {
    state.apply_turn(offer, responses)?;
    if let Some(v) = violation {
        state.flag_invalid_proposal(v);
    }
    let record = state.history().last().expect("turn applied").clone();
    let pre = state.holdings_before(record.turn as usize);
    let seen = ObservedTurn { record: &record, pre_holdings: pre };
    for a in agents.iter_mut() {
        a.observe(&seen);
    }
    Ok(record)
}

/// Plays the current turn entirely with agents.
pub fn play_turn<A: Agent>(state: &mut GameState, agents: &mut [A]) -> Result<TurnRecord, ProtocolError> {
    let proposer = state.current_proposer().ok_or(ProtocolError::GameOver)?;
    let (offer, violation) = propose_checked(state, &mut agents[proposer.0])?;
    let responses = collect_responses(state, &offer, agents);
    commit_turn(state, &offer, &responses, violation, agents)
}

/// Plays every remaining turn.
pub fn play_game<A: Agent>(state: &mut GameState, agents: &mut [A]) -> Result<(), ProtocolError> {
    if agents.len() != state.config().n_players {
        return Err(ProtocolError::ResponseArity {
            expected: state.config().n_players,
            got: agents.len(),
        });
    }
    while !state.is_terminal() {
        play_turn(state, agents)?;
    }
    Ok(())
}

/// Builds one of the built-in agents. Returns `None` for seats that need
/// outside help (`llm:*` and `human`).
pub fn builtin_agent(
    spec: &AgentSpec,
    config: &GameConfig,
    seat: PlayerId,
    seed: u64,
    options: BayesianOptions,
) -> Option<Box<dyn Agent + Send>> {
    match spec {
        AgentSpec::Bayesian => Some(Box::new(BayesianAgent::new(config, seat, options))),
        AgentSpec::Greedy => Some(Box::new(GreedyConcessionary::new())),
        AgentSpec::Random => Some(Box::new(RandomRational::new(seed))),
        AgentSpec::Llm(_) | AgentSpec::Human => None,
    }
}

/// Bayesian options suited to a seating: proposals are only treated as
/// evidence when every seat is a Bayesian agent.
pub fn options_for(seats: &[AgentSpec]) -> BayesianOptions {
    BayesianOptions {
        prune_on_proposals: seats.iter().all(|s| *s == AgentSpec::Bayesian),
    }
}
