//! Exhaustive search over integer allocations, for cross-checking the LP on
//! small instances.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::game::{welfare, AllocationMatrix, PlayerId, ValuationProfile};
use crate::money::Cents;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("color {color} has {chips} chips in total, above the limit of {limit}")]
    TooLarge { color: usize, chips: u64, limit: u64 },
    #[error("valuations and allocation disagree in shape")]
    Shape,
}

/// Best integer allocation found and its total welfare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOptimum {
    pub welfare: Cents,
    pub allocation: AllocationMatrix,
}

/// Maximum total welfare over integer allocations that conserve every color
/// and leave no player below their initial welfare. Refuses instances with
/// more than `max_chips` chips of any one color.
pub fn integer_oracle(
    valuations: &ValuationProfile,
    initial: &AllocationMatrix,
    max_chips: u64,
) -> Result<OracleOptimum, OracleError> {
    let n = initial.n_players();
    let k = initial.n_colors();
    if valuations.n_players() != n || valuations.0.iter().any(|r| r.len() != k) {
        return Err(OracleError::Shape);
    }
    let totals = initial.column_sums();
    for (color, &chips) in totals.iter().enumerate() {
        if chips > max_chips {
            return Err(OracleError::TooLarge { color, chips, limit: max_chips });
        }
    }
    let floors: Vec<i64> = (0..n).map(|p| welfare(valuations, initial, PlayerId(p)).0).collect();
    let v: Vec<Vec<i64>> = valuations.0.iter().map(|r| r.iter().map(|c| c.0).collect()).collect();
    let totals: Vec<i64> = totals.iter().map(|&t| t as i64).collect();

    // best value each player could still add from colors c.. onward, if they
    // received every remaining chip of those colors
    let mut reach = vec![vec![0i64; k + 1]; n];
    // best total still reachable from colors c.. onward
    let mut cap = vec![0i64; k + 1];
    for c in (0..k).rev() {
        for p in 0..n {
            reach[p][c] = reach[p][c + 1] + v[p][c] * totals[c];
        }
        cap[c] = cap[c + 1] + totals[c] * (0..n).map(|p| v[p][c]).max().unwrap_or(0);
    }

    let initial_total: i64 = floors.iter().sum();
    let mut search = Search {
        n,
        k,
        v: &v,
        totals: &totals,
        floors: &floors,
        reach: &reach,
        cap: &cap,
        partial: vec![0; n],
        current: vec![vec![0; k]; n],
        best: initial_total,
        best_alloc: initial.0.clone(),
    };
    search.color(0, 0);
    Ok(OracleOptimum { welfare: Cents(search.best), allocation: AllocationMatrix(search.best_alloc) })
}

struct Search<'a> {
    n: usize,
    k: usize,
    v: &'a [Vec<i64>],
    totals: &'a [i64],
    floors: &'a [i64],
    reach: &'a [Vec<i64>],
    cap: &'a [i64],
    partial: Vec<i64>,
    current: Vec<Vec<u32>>,
    best: i64,
    best_alloc: Vec<Vec<u32>>,
}

impl Search<'_> {
    fn color(&mut self, c: usize, total: i64) {
        if total + self.cap[c] <= self.best {
            return;
        }
        if (0..self.n).any(|p| self.partial[p] + self.reach[p][c] < self.floors[p]) {
            return;
        }
        if c == self.k {
            self.best = total;
            self.best_alloc = self.current.clone();
            return;
        }
        self.split(c, 0, self.totals[c], total);
    }

    /// Hands out `left` chips of color `c` to players `p..`.
    fn split(&mut self, c: usize, p: usize, left: i64, total: i64) {
        if p == self.n - 1 {
            self.give(c, p, left);
            self.color(c + 1, total + self.v[p][c] * left);
            self.give(c, p, -left);
            return;
        }
        for q in (0..=left).rev() {
            self.give(c, p, q);
            self.split(c, p + 1, left - q, total + self.v[p][c] * q);
            self.give(c, p, -q);
        }
    }

    fn give(&mut self, c: usize, p: usize, q: i64) {
        self.partial[p] += self.v[p][c] * q;
        self.current[p][c] = (self.current[p][c] as i64 + q) as u32;
    }
}
