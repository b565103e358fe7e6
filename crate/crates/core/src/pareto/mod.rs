//! The welfare upper bound: the best total welfare reachable by any
//! reallocation that conserves chips and leaves nobody worse off than their
//! endowment.

mod oracle;
mod simplex;

pub use oracle::{integer_oracle, OracleError, OracleOptimum};
pub use simplex::{maximize, LpSolution, LpStatus};

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::game::{total_welfare, welfare, AllocationMatrix, PlayerId, ValuationProfile};
use crate::money::Cents;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoResult {
    /// Continuous optimal allocation, players by colors.
    pub optimal_allocation: Vec<Vec<f64>>,
    /// Maximum total welfare in cents, rounded to 1e-4 cents.
    pub w_star: f64,
    pub initial_welfare: Cents,
    /// Initial welfare of each player.
    pub per_player_floor: Vec<Cents>,
    pub status: LpStatus,
    pub pivots: usize,
}

impl ParetoResult {
    /// `w_star` minus the initial total welfare, in cents.
    pub fn headroom(&self) -> f64 {
        self.w_star - self.initial_welfare.0 as f64
    }
}

/// Solves the welfare-maximizing reallocation as a linear program over
/// continuous chip amounts.
pub fn optimal_allocation(valuations: &ValuationProfile, initial: &AllocationMatrix) -> ParetoResult {
    let n = initial.n_players();
    let k = initial.n_colors();
    let floors: Vec<Cents> = (0..n).map(|p| welfare(valuations, initial, PlayerId(p))).collect();
    let initial_welfare = total_welfare(valuations, initial);

    // variables: a[p][c] at p * k + c, then one surplus slack per player
    let n_vars = n * k + n;
    let mut c = vec![0.0; n_vars];
    for p in 0..n {
        for col in 0..k {
            c[p * k + col] = valuations.0[p][col].0 as f64;
        }
    }
    let mut a = Vec::with_capacity(k + n);
    let mut b = Vec::with_capacity(k + n);
    for (col, total) in initial.column_sums().into_iter().enumerate() {
        let mut row = vec![0.0; n_vars];
        for p in 0..n {
            row[p * k + col] = 1.0;
        }
        a.push(row);
        b.push(total as f64);
    }
    for p in 0..n {
        let mut row = vec![0.0; n_vars];
        for col in 0..k {
            row[p * k + col] = valuations.0[p][col].0 as f64;
        }
        row[n * k + p] = -1.0;
        a.push(row);
        b.push(floors[p].0 as f64);
    }

    let sol = maximize(&c, &a, &b);
    let optimal_allocation = (0..n)
        .map(|p| (0..k).map(|col| clean(sol.x[p * k + col])).collect())
        .collect();
    let w_star = if sol.status == LpStatus::Optimal {
        // the endowment is feasible, so never report less than it
        round4(sol.objective).max(initial_welfare.0 as f64)
    } else {
        f64::NAN
    };
    ParetoResult {
        optimal_allocation,
        w_star,
        initial_welfare,
        per_player_floor: floors,
        status: sol.status,
        pivots: sol.pivots,
    }
}

fn round4(x: f64) -> f64 {
    libm::round(x * 1e4) / 1e4
}

fn clean(x: f64) -> f64 {
    let r = round4(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledSurplus {
    pub value: f64,
    /// The optimum leaves less than one cent of room above the endowment.
    pub degenerate: bool,
}

/// Share of the available surplus realized by a final allocation with total
/// welfare `observed`. Negative when value was destroyed.
pub fn scaled_surplus(observed: Cents, pareto: &ParetoResult) -> ScaledSurplus {
    let gained = (observed - pareto.initial_welfare).0 as f64;
    let room = pareto.headroom();
    if room < 1.0 {
        ScaledSurplus { value: if gained >= 0.0 { 1.0 } else { 0.0 }, degenerate: true }
    } else {
        ScaledSurplus { value: gained / room, degenerate: false }
    }
}
