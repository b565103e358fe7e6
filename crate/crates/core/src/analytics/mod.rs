//! Post-hoc analysis of game logs.

mod complexity;
mod counterfactual;
mod regret;
mod stats;
mod trade_space;
mod trajectory;

pub use complexity::{expected_rational_trades, ComplexityOptions, OpponentRule, Sampling};
pub use counterfactual::{
    counterfactual_replay, recorded_path, Alternative, Replay, ReplayError, Substitution,
};
pub use regret::{classify_actions, RegretKind, RegretLabel, Role, UnscoredReason};
pub use stats::{median, Summary};
pub use trade_space::{summarize, trade_points, SideSummary, TradePoint, TradeSpaceSummary};
pub use trajectory::surplus_trajectory;
