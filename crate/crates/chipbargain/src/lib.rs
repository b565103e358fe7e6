//! Simulator, analysis tools and play service built on `chipbargain-core`.

pub mod analyze;
pub mod harness;
pub mod io;
pub mod profiles;
pub mod service;
pub mod transport;
