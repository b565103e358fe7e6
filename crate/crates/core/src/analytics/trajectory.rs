use alloc::vec::Vec;

use crate::game::total_welfare;
use crate::log::GameLog;
use crate::pareto::ParetoResult;

/// Cumulative scaled surplus after each turn, starting with 0 before the
/// first turn. The series only moves on turns that executed a trade.
///
/// When the optimum leaves less than a cent of room, each point is 0 until
/// the first executed trade and afterwards 1 or 0 depending on whether total
/// welfare is at least its starting level.
pub fn surplus_trajectory(log: &GameLog, pareto: &ParetoResult) -> Vec<f64> {
    let values = &log.header.valuations;
    let w0 = pareto.initial_welfare;
    let room = pareto.headroom();
    let mut out = Vec::with_capacity(log.turns.len() + 1);
    out.push(0.0);
    let mut traded = false;
    let mut last = 0.0;
    for rec in &log.turns {
        if rec.executed {
            traded = true;
            let gained = (total_welfare(values, &rec.post_holdings) - w0).0 as f64;
            last = if room < 1.0 {
                if gained >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                gained / room
            };
        }
        out.push(if traded { last } else { 0.0 });
    }
    out
}
