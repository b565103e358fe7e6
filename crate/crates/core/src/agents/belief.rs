use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::game::welfare::offer_delta_for_responder;
use crate::game::{ColorId, GameConfig, Offer, PlayerId};
use crate::money::Cents;

/// Discrete belief over one opponent's private values, joint across that
/// opponent's private colors. The numeraire value is common knowledge.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentBelief {
    opponent: PlayerId,
    n_colors: usize,
    /// Full value row of every state, `n_colors` entries per state.
    values: Vec<Cents>,
    weights: Vec<f64>,
}

impl OpponentBelief {
    /// Uniform prior over every grid point of every private color.
    pub fn uniform(config: &GameConfig, opponent: PlayerId) -> Self {
        let grid = config.value_grid();
        let private = config.private_colors();
        let n_colors = config.n_colors();
        let n_states = grid.len().pow(private.len() as u32);
        let mut values = Vec::with_capacity(n_states * n_colors);
        for s in 0..n_states {
            let mut row = vec![config.numeraire_value; n_colors];
            let mut rest = s;
            // last private color varies fastest
            for &c in private.iter().rev() {
                row[c.0] = grid[rest % grid.len()];
                rest /= grid.len();
            }
            values.extend_from_slice(&row);
        }
        let w = 1.0 / n_states as f64;
        OpponentBelief { opponent, n_colors, values, weights: vec![w; n_states] }
    }

    pub fn opponent(&self) -> PlayerId {
        self.opponent
    }

    pub fn n_states(&self) -> usize {
        self.weights.len()
    }

    pub fn state_values(&self, state: usize) -> &[Cents] {
        &self.values[state * self.n_colors..(state + 1) * self.n_colors]
    }

    pub fn weight(&self, state: usize) -> f64 {
        self.weights[state]
    }

    pub fn states(&self) -> impl Iterator<Item = (&[Cents], f64)> + '_ {
        self.values.chunks_exact(self.n_colors).zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Probability mass on the exact value row `values`.
    pub fn mass_of(&self, values: &[Cents]) -> f64 {
        self.states()
            .filter(|(v, _)| *v == values)
            .map(|(_, w)| w)
            .sum()
    }

    /// Mass of states that would strictly profit from accepting `offer`.
    pub fn accepting_mass(&self, offer: &Offer) -> f64 {
        self.states()
            .filter(|(v, w)| *w > 0.0 && offer_delta_for_responder(v, offer).is_positive())
            .map(|(_, w)| w)
            .sum()
    }

    /// Marginal over the values of two colors, as `(value_a, value_b, mass)`
    /// cells with positive mass, sorted by value.
    pub fn pair_marginal(&self, a: ColorId, b: ColorId) -> Vec<(Cents, Cents, f64)> {
        let mut cells: BTreeMap<(Cents, Cents), f64> = BTreeMap::new();
        for (v, w) in self.states() {
            if w > 0.0 {
                *cells.entry((v[a.0], v[b.0])).or_insert(0.0) += w;
            }
        }
        cells.into_iter().map(|((x, y), m)| (x, y, m)).collect()
    }

    /// Zeroes every state for which `keep` is false and renormalizes. If no
    /// state survives, the belief falls back to the uniform prior and the
    /// call returns `false`.
    pub fn retain<F: Fn(&[Cents]) -> bool>(&mut self, keep: F) -> bool {
        let n = self.n_colors;
        for (s, w) in self.weights.iter_mut().enumerate() {
            if *w > 0.0 && !keep(&self.values[s * n..(s + 1) * n]) {
                *w = 0.0;
            }
        }
        let mass: f64 = self.weights.iter().sum();
        if mass > 0.0 {
            self.weights.iter_mut().for_each(|w| *w /= mass);
            true
        } else {
            let w = 1.0 / self.weights.len() as f64;
            self.weights.iter_mut().for_each(|x| *x = w);
            false
        }
    }

    pub fn snapshot(&self) -> OpponentSnapshot {
        OpponentSnapshot {
            opponent: self.opponent,
            support: self
                .states()
                .filter(|(_, w)| *w > 0.0)
                .map(|(v, w)| SupportPoint { values: v.to_vec(), probability: w })
                .collect(),
        }
    }
}

/// One seat's beliefs about every other seat.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    me: PlayerId,
    by_player: Vec<Option<OpponentBelief>>,
}

impl BeliefState {
    pub fn uniform(config: &GameConfig, me: PlayerId) -> Self {
        let by_player = (0..config.n_players)
            .map(|p| (p != me.0).then(|| OpponentBelief::uniform(config, PlayerId(p))))
            .collect();
        BeliefState { me, by_player }
    }

    pub fn me(&self) -> PlayerId {
        self.me
    }

    pub fn opponent(&self, p: PlayerId) -> Option<&OpponentBelief> {
        self.by_player.get(p.0).and_then(Option::as_ref)
    }

    pub fn opponent_mut(&mut self, p: PlayerId) -> Option<&mut OpponentBelief> {
        self.by_player.get_mut(p.0).and_then(Option::as_mut)
    }

    pub fn opponents(&self) -> impl Iterator<Item = &OpponentBelief> + '_ {
        self.by_player.iter().flatten()
    }

    pub fn snapshot(&self) -> BeliefSnapshot {
        BeliefSnapshot {
            me: self.me,
            opponents: self.opponents().map(OpponentBelief::snapshot).collect(),
        }
    }
}

/// A belief that lost all support and was reset to the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Misspecification {
    pub turn: u32,
    pub opponent: PlayerId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub values: Vec<Cents>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentSnapshot {
    pub opponent: PlayerId,
    pub support: Vec<SupportPoint>,
}

/// JSON-friendly dump of a belief state, listing only the support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub me: PlayerId,
    pub opponents: Vec<OpponentSnapshot>,
}
