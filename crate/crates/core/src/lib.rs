//! Core of a three-seat chip bargaining simulator.
//!
//! Players hold chips of several colors, one of which (the numeraire) is valued
//! identically by everyone while the rest carry private per-player values. On
//! each turn one player proposes to swap chips of one color for chips of
//! another, the others answer simultaneously, and one accepter is drawn at
//! random to clear the trade.
//!
//! This crate is `no_std` (it needs `alloc`) and contains everything that does
//! not touch IO:
//!
//! - [`game`]: configuration, engine state machine, welfare accounting
//! - [`agents`]: the agent contract, the Bayesian agent and simple baselines
//! - [`pareto`]: the welfare upper bound as a linear program plus an integer oracle
//! - [`analytics`]: trade-space statistics, regret classification, surplus
//!   trajectories and the decision-space estimator
//! - [`llm`]: prompt rendering, tag parsing and the transport-agnostic LLM agent
//! - [`log`]: the serializable game log schema
#![no_std]

extern crate alloc;

pub mod agents;
pub mod analytics;
pub mod game;
pub mod llm;
pub mod log;
pub mod money;
pub mod pareto;
pub mod play;
pub mod seed;

pub use game::{
    AllocationMatrix, ColorId, GameConfig, GameState, Offer, PlayerId, Response, TradeOffer,
    TurnRecord, ValuationProfile,
};
pub use money::Cents;
