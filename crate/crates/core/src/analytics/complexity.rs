//! Monte Carlo estimate of how many offers a proposer could make that are
//! profitable to itself and acceptable to at least one opponent.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::Summary;
use crate::game::GameConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpponentRule {
    /// Some opponent, with values drawn like the proposer's, would accept.
    #[default]
    Drawn,
    /// Some value vector in the prior's support would accept.
    PriorSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Values on the engine's price grid.
    #[default]
    Grid,
    /// Values uniform on the continuous interval.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComplexityOptions {
    pub rule: OpponentRule,
    pub sampling: Sampling,
}

/// Expected number of rational offers per proposer, with its standard error
/// over samples.
pub fn expected_rational_trades(
    config: &GameConfig,
    n_samples: usize,
    seed: u64,
    options: ComplexityOptions,
) -> Summary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = config.value_grid().iter().map(|c| c.0 as f64).collect();
    let (low, high) = (config.private_value_low.0 as f64, config.private_value_high.0 as f64);
    let numeraire = config.numeraire_value.0 as f64;
    let n = config.n_players;
    let k = config.n_colors();
    let e = config.endowment_per_color;

    // extreme prior values per color: best a responder could value what it
    // receives, and least it could value what it pays
    let prior_max: Vec<f64> = config
        .color_ids()
        .map(|c| if c == config.numeraire { numeraire } else { high })
        .collect();
    let prior_min: Vec<f64> = config
        .color_ids()
        .map(|c| if c == config.numeraire { numeraire } else { low })
        .collect();

    let mut per_sample = Vec::with_capacity(n_samples);
    let mut values = alloc::vec![alloc::vec![0.0f64; k]; n];
    for _ in 0..n_samples {
        for row in values.iter_mut() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = if c == config.numeraire.0 {
                    numeraire
                } else {
                    match options.sampling {
                        Sampling::Grid => grid[rng.gen_range(0..grid.len())],
                        Sampling::Continuous => rng.gen_range(low..=high),
                    }
                };
            }
        }
        let mut count = 0u64;
        for i in 0..n {
            let vi = &values[i];
            for g in 0..k {
                for r in 0..k {
                    if g == r {
                        continue;
                    }
                    for x in 1..=e {
                        for y in 1..=e {
                            let (xf, yf) = (x as f64, y as f64);
                            if vi[r] * yf - vi[g] * xf <= 0.0 {
                                continue;
                            }
                            let accepted = match options.rule {
                                OpponentRule::Drawn => (0..n)
                                    .filter(|&j| j != i)
                                    .any(|j| values[j][g] * xf - values[j][r] * yf > 0.0),
                                OpponentRule::PriorSupport => prior_max[g] * xf - prior_min[r] * yf > 0.0,
                            };
                            if accepted {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        per_sample.push(count as f64 / n as f64);
    }
    Summary::of(&per_sample)
}
