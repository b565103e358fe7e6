//! Unbounded-horizon trading: repeated shuffled pairwise proposals until a
//! full pass produces no trade.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::bayesian::{best_offer, BayesianAgent};
use super::{myopic_response, Observation, ObservedTurn};
use crate::game::{AllocationMatrix, GameConfig, PlayerId, Response, TurnRecord, ValuationProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvergenceError {
    #[error("no convergence after {0} passes")]
    PassLimit(usize),
    #[error("expected one agent per player ({expected}), got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceOutcome {
    pub allocation: AllocationMatrix,
    /// Passes run, including the final quiet one.
    pub passes: usize,
    pub trades: usize,
    /// Every pairwise proposal, with `round` holding the pass index.
    pub records: Vec<TurnRecord>,
}

/// Each pass visits the players in a fresh random order; for every ordered
/// pair `(a, b)` with `a` earlier than `b`, `a` makes its best offer to `b`
/// alone and `b` answers myopically. Every agent then updates on the turn.
pub fn run_to_convergence(
    agents: &mut [BayesianAgent],
    config: &GameConfig,
    valuations: &ValuationProfile,
    initial: &AllocationMatrix,
    seed: u64,
    max_passes: usize,
) -> Result<ConvergenceOutcome, ConvergenceError> {
    let n = config.n_players;
    if agents.len() != n {
        return Err(ConvergenceError::Arity { expected: n, got: agents.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holdings = initial.clone();
    let mut records: Vec<TurnRecord> = Vec::new();
    let mut trades = 0;
    let mut order: Vec<PlayerId> = (0..n).map(PlayerId).collect();
    for pass in 0..max_passes {
        order.shuffle(&mut rng);
        let mut traded = false;
        for k in 0..n {
            for l in k + 1..n {
                let (i, j) = (order[k], order[l]);
                let obs_i = observation(config, valuations, &holdings, &records, &order, i, pass);
                let Some(scored) = best_offer(&obs_i, agents[i.0].belief(), &[j]) else {
                    continue;
                };
                let offer = scored.offer;
                let obs_j = observation(config, valuations, &holdings, &records, &order, j, pass);
                let response = myopic_response(&obs_j, &offer);
                let mut responses = vec![None; n];
                responses[j.0] = Some(response);
                let pre = holdings.clone();
                let executed = response == Response::Accept;
                if executed {
                    holdings.execute(i, j, &offer);
                    trades += 1;
                    traded = true;
                }
                records.push(TurnRecord {
                    round: pass as u32,
                    turn: records.len() as u32,
                    proposer: i,
                    offer: offer.into(),
                    responses,
                    coerced: Vec::new(),
                    selected_acceptor: executed.then_some(j),
                    executed,
                    invalid_proposal: None,
                    post_holdings: holdings.clone(),
                });
                let seen = ObservedTurn { record: records.last().expect("pushed"), pre_holdings: &pre };
                for a in agents.iter_mut() {
                    a.update(&seen);
                }
            }
        }
        if !traded {
            return Ok(ConvergenceOutcome { allocation: holdings, passes: pass + 1, trades, records });
        }
    }
    Err(ConvergenceError::PassLimit(max_passes))
}

fn observation<'a>(
    config: &'a GameConfig,
    valuations: &'a ValuationProfile,
    holdings: &'a AllocationMatrix,
    history: &'a [TurnRecord],
    order: &'a [PlayerId],
    me: PlayerId,
    pass: usize,
) -> Observation<'a> {
    Observation {
        me,
        config,
        my_values: valuations.row(me),
        holdings,
        history,
        turn_order: order,
        round: pass as u32,
        turn: history.len() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::BayesianOptions;
    use crate::game::total_welfare;
    use crate::money::Cents;

    fn agents(config: &GameConfig) -> Vec<BayesianAgent> {
        (0..config.n_players)
            .map(|p| BayesianAgent::new(config, PlayerId(p), BayesianOptions::default()))
            .collect()
    }

    #[test]
    fn identical_values_never_trade() {
        let config = GameConfig::variant(3, 4);
        let v = ValuationProfile(vec![vec![Cents(50), Cents(35), Cents(80)]; 3]);
        let a0 = AllocationMatrix::uniform(3, 3, 10);
        let out = run_to_convergence(&mut agents(&config), &config, &v, &a0, 1, 1000).unwrap();
        assert_eq!(out.trades, 0);
        assert_eq!(out.passes, 1);
        assert_eq!(out.allocation, a0);
    }

    #[test]
    fn two_player_hand_trace() {
        let mut config = GameConfig::variant(2, 0);
        config.n_players = 2;
        config.endowment_per_color = 1;
        let v = ValuationProfile(vec![vec![Cents(50), Cents(100)], vec![Cents(50), Cents(10)]]);
        let a0 = AllocationMatrix::uniform(2, 2, 1);
        for seed in 0..8 {
            let out = run_to_convergence(&mut agents(&config), &config, &v, &a0, seed, 1000).unwrap();
            assert_eq!(out.allocation, AllocationMatrix(vec![vec![0, 2], vec![2, 0]]));
            assert_eq!(out.trades, 1);
            assert_eq!(out.passes, 2);
        }
    }

    #[test]
    fn welfare_never_falls() {
        for seed in 0..10 {
            let config = GameConfig::variant(3, seed);
            let state = crate::game::GameState::new(config.clone()).unwrap();
            let a0 = state.initial_holdings().clone();
            let out =
                run_to_convergence(&mut agents(&config), &config, state.valuations(), &a0, seed, 1000)
                    .unwrap();
            assert!(total_welfare(state.valuations(), &out.allocation) >= total_welfare(state.valuations(), &a0));
            assert_eq!(out.allocation.column_sums(), a0.column_sums());
        }
    }

    #[test]
    fn arity_is_checked() {
        let config = GameConfig::variant(2, 0);
        let v = ValuationProfile(vec![vec![Cents(50), Cents(10)]; 3]);
        let a0 = AllocationMatrix::uniform(3, 2, 1);
        let mut two = agents(&config);
        two.pop();
        assert!(matches!(
            run_to_convergence(&mut two, &config, &v, &a0, 0, 10),
            Err(ConvergenceError::Arity { .. })
        ));
    }
}
