use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::ColorId;
use crate::money::Cents;

/// Color names used by the standard 2/3/4-chip variants, numeraire first.
pub const COLOR_NAMES: [&str; 4] = ["green", "red", "blue", "purple"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n_players: usize,
    pub colors: Vec<String>,
    pub numeraire: ColorId,
    pub endowment_per_color: u32,
    pub numeraire_value: Cents,
    pub private_value_low: Cents,
    pub private_value_high: Cents,
    pub value_grid_step: Cents,
    pub rounds: u32,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("need at least two players, got {0}")]
    TooFewPlayers(usize),
    #[error("need at least one color")]
    NoColors,
    #[error("numeraire index {0} is not a configured color")]
    BadNumeraire(usize),
    #[error("duplicate color name {0:?}")]
    DuplicateColor(String),
    #[error("private value bounds must satisfy 0 < low < high")]
    BadValueBounds,
    #[error("grid step must be positive and divide high - low")]
    BadGridStep,
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("numeraire value must be positive")]
    BadNumeraireValue,
    #[error("{0}")]
    Shape(&'static str),
}

impl GameConfig {
    /// The standard game with `n_colors` colors (2, 3 or 4): three players,
    /// ten chips of each color, green as numeraire at $0.50, private values on
    /// the $0.05 grid over [$0.10, $1.00], three rounds.
    pub fn variant(n_colors: usize, seed: u64) -> Self {
        let n_colors = n_colors.clamp(1, COLOR_NAMES.len());
        GameConfig {
            n_players: 3,
            colors: COLOR_NAMES[..n_colors].iter().map(|c| c.to_string()).collect(),
            numeraire: ColorId(0),
            endowment_per_color: 10,
            numeraire_value: Cents(50),
            private_value_low: Cents(10),
            private_value_high: Cents(100),
            value_grid_step: Cents(5),
            rounds: 3,
            rng_seed: seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_players < 2 {
            return Err(ConfigError::TooFewPlayers(self.n_players));
        }
        if self.colors.is_empty() {
            return Err(ConfigError::NoColors);
        }
        if self.numeraire.0 >= self.colors.len() {
            return Err(ConfigError::BadNumeraire(self.numeraire.0));
        }
        for (i, c) in self.colors.iter().enumerate() {
            if self.colors[..i].iter().any(|o| o.eq_ignore_ascii_case(c)) {
                return Err(ConfigError::DuplicateColor(c.clone()));
            }
        }
        let (low, high, step) = (
            self.private_value_low.0,
            self.private_value_high.0,
            self.value_grid_step.0,
        );
        if low <= 0 || low >= high {
            return Err(ConfigError::BadValueBounds);
        }
        if step <= 0 || (high - low) % step != 0 {
            return Err(ConfigError::BadGridStep);
        }
        if self.numeraire_value.0 <= 0 {
            return Err(ConfigError::BadNumeraireValue);
        }
        if self.rounds == 0 {
            return Err(ConfigError::NoRounds);
        }
        Ok(())
    }

    pub fn n_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn color_ids(&self) -> impl Iterator<Item = ColorId> + Clone {
        (0..self.colors.len()).map(ColorId)
    }

    /// Non-numeraire colors in configuration order.
    pub fn private_colors(&self) -> Vec<ColorId> {
        self.color_ids().filter(|&c| c != self.numeraire).collect()
    }

    pub fn color_name(&self, color: ColorId) -> &str {
        &self.colors[color.0]
    }

    /// Case-insensitive lookup of a color by name.
    pub fn color_by_name(&self, name: &str) -> Option<ColorId> {
        let name = name.trim();
        self.colors
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
            .map(ColorId)
    }

    /// All admissible private values, ascending.
    pub fn value_grid(&self) -> Vec<Cents> {
        let mut grid = Vec::new();
        let mut v = self.private_value_low.0;
        while v <= self.private_value_high.0 {
            grid.push(Cents(v));
            v += self.value_grid_step.0;
        }
        grid
    }

    pub fn total_turns(&self) -> usize {
        self.rounds as usize * self.n_players
    }

    pub fn on_grid(&self, value: Cents) -> bool {
        value >= self.private_value_low
            && value <= self.private_value_high
            && (value.0 - self.private_value_low.0) % self.value_grid_step.0 == 0
    }
}
