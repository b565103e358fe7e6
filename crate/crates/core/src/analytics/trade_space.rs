use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::stats::Summary;
use crate::game::welfare::offer_delta_for_proposer;
use crate::game::PlayerId;
use crate::log::GameLog;
use crate::money::Cents;

/// One non-pass proposal, seen from the proposer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradePoint {
    pub game_id: u64,
    pub turn: u32,
    pub proposer: PlayerId,
    pub net_surplus: Cents,
    /// Chips given over chips requested.
    pub trade_ratio: f64,
    pub accepted: bool,
}

pub fn trade_points(log: &GameLog) -> Vec<TradePoint> {
    let values = &log.header.valuations;
    log.turns
        .iter()
        .filter_map(|rec| {
            let o = rec.offer.as_trade()?;
            Some(TradePoint {
                game_id: log.header.game_id,
                turn: rec.turn,
                proposer: rec.proposer,
                net_surplus: offer_delta_for_proposer(values.row(rec.proposer), o),
                trade_ratio: o.ratio(),
                accepted: rec.executed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SideSummary {
    /// Proposer surplus in dollars.
    pub surplus: Summary,
    pub ratio: Summary,
}

impl SideSummary {
    fn of<'a>(points: impl Iterator<Item = &'a TradePoint> + Clone) -> Self {
        let surplus: Vec<f64> = points.clone().map(|p| p.net_surplus.dollars()).collect();
        let ratio: Vec<f64> = points.map(|p| p.trade_ratio).collect();
        SideSummary { surplus: Summary::of(&surplus), ratio: Summary::of(&ratio) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TradeSpaceSummary {
    pub proposals: usize,
    pub accepted: SideSummary,
    pub rejected: SideSummary,
    /// Share of proposals that did not execute; zero when there were none.
    pub rejection_rate: f64,
    /// Proposals whose proposer surplus was zero or negative.
    pub non_positive_proposals: usize,
}

pub fn summarize(points: &[TradePoint]) -> TradeSpaceSummary {
    let n = points.len();
    let rejected = points.iter().filter(|p| !p.accepted).count();
    TradeSpaceSummary {
        proposals: n,
        accepted: SideSummary::of(points.iter().filter(|p| p.accepted)),
        rejected: SideSummary::of(points.iter().filter(|p| !p.accepted)),
        rejection_rate: if n == 0 { 0.0 } else { rejected as f64 / n as f64 },
        non_positive_proposals: points.iter().filter(|p| !p.net_surplus.is_positive()).count(),
    }
}
