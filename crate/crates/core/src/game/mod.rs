//! The bargaining game: data model, turn protocol and welfare accounting.

mod config;
pub(crate) mod state;
mod types;
pub(crate) mod welfare;

pub use config::{ConfigError, GameConfig, COLOR_NAMES};
pub use state::{check_offer, GameState, OfferViolation, ProtocolError};
pub use types::{
    AllocationMatrix, ColorId, Offer, PlayerId, Response, TradeOffer, TurnRecord,
    ValuationProfile,
};
pub use welfare::{
    proposer_delta, responder_delta, surplus_gain, total_welfare, welfare, PassOffer,
    SurplusGain,
};
