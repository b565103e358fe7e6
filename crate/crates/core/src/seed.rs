//! Per-game seed derivation for batches.
//!
//! Game `k` of a batch with master seed `m` uses
//! `splitmix64(m ^ splitmix64(k))`, where `splitmix64` is the finalizer of
//! Vigna's SplitMix64 generator applied to `x + 0x9E3779B97F4A7C15`. The seed
//! of a game depends only on `(m, k)`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn game_seed(master_seed: u64, game_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(game_index))
}

/// Seed for an agent-owned random stream (e.g. the random baseline) in seat
/// `seat` of a game seeded with `game_seed`.
pub fn seat_seed(game_seed: u64, seat: usize) -> u64 {
    splitmix64(game_seed ^ splitmix64(0x5EA7_0000 + seat as u64))
}
