//! Game log schema. A log file is JSON Lines: one `header` line per game
//! followed by one `turn` line per turn. Every line carries `schema`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    AllocationMatrix, ConfigError, GameConfig, GameState, PlayerId, TurnRecord, ValuationProfile,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameHeader {
    pub schema: u32,
    pub game_id: u64,
    pub config: GameConfig,
    /// Agent spec per seat, e.g. `bayesian` or `llm:gpt`.
    pub seats: Vec<String>,
    pub valuations: ValuationProfile,
    pub initial_holdings: AllocationMatrix,
    pub turn_order: Vec<PlayerId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnLine {
    pub schema: u32,
    pub game_id: u64,
    #[serde(flatten)]
    pub record: TurnRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLine {
    Header(GameHeader),
    Turn(TurnLine),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameLog {
    pub header: GameHeader,
    pub turns: Vec<TurnRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("turn line for game {0} without a preceding header")]
    Orphan(u64),
    #[error("turn {got} of game {game} is out of sequence (expected {expected})")]
    Sequence { game: u64, expected: u32, got: u32 },
    #[error("bad game setup: {0}")]
    Setup(#[from] ConfigError),
}

impl GameLog {
    pub fn from_state(game_id: u64, seats: Vec<String>, state: &GameState) -> Self {
        GameLog {
            header: GameHeader {
                schema: SCHEMA_VERSION,
                game_id,
                config: state.config().clone(),
                seats,
                valuations: state.valuations().clone(),
                initial_holdings: state.initial_holdings().clone(),
                turn_order: state.turn_order().to_vec(),
            },
            turns: state.history().to_vec(),
        }
    }

    /// A fresh engine state with this log's setup and no turns played.
    pub fn initial_state(&self) -> Result<GameState, ConfigError> {
        GameState::from_setup(
            self.header.config.clone(),
            self.header.valuations.clone(),
            self.header.initial_holdings.clone(),
            self.header.turn_order.clone(),
        )
    }

    pub fn final_holdings(&self) -> &AllocationMatrix {
        self.turns
            .last()
            .map_or(&self.header.initial_holdings, |t| &t.post_holdings)
    }

    /// Holdings before `turn` was played.
    pub fn holdings_before(&self, turn: usize) -> &AllocationMatrix {
        if turn == 0 {
            &self.header.initial_holdings
        } else {
            &self.turns[turn - 1].post_holdings
        }
    }

    pub fn n_colors(&self) -> usize {
        self.header.config.n_colors()
    }

    pub fn lines(&self) -> impl Iterator<Item = LogLine> + '_ {
        core::iter::once(LogLine::Header(self.header.clone())).chain(self.turns.iter().map(
            move |t| {
                LogLine::Turn(TurnLine {
                    schema: SCHEMA_VERSION,
                    game_id: self.header.game_id,
                    record: t.clone(),
                })
            },
        ))
    }

    /// Groups a stream of lines back into games.
    pub fn collect_lines<I: IntoIterator<Item = LogLine>>(lines: I) -> Result<Vec<GameLog>, LogError> {
        let mut games: Vec<GameLog> = Vec::new();
        for line in lines {
            match line {
                LogLine::Header(h) => {
                    if h.schema != SCHEMA_VERSION {
                        return Err(LogError::Schema(h.schema));
                    }
                    games.push(GameLog { header: h, turns: Vec::new() });
                }
                LogLine::Turn(t) => {
                    if t.schema != SCHEMA_VERSION {
                        return Err(LogError::Schema(t.schema));
                    }
                    let game = games
                        .last_mut()
                        .filter(|g| g.header.game_id == t.game_id)
                        .ok_or(LogError::Orphan(t.game_id))?;
                    let expected = game.turns.len() as u32;
                    if t.record.turn != expected {
                        return Err(LogError::Sequence {
                            game: t.game_id,
                            expected,
                            got: t.record.turn,
                        });
                    }
                    game.turns.push(t.record);
                }
            }
        }
        Ok(games)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Response, TradeOffer};
    use alloc::string::ToString;
    use alloc::vec;

    fn sample_log() -> GameLog {
        let mut state = GameState::new(GameConfig::variant(2, 5)).unwrap();
        let p = state.current_proposer().unwrap();
        let resp: Vec<_> = (0..3)
            .map(|i| if i == p.0 { None } else { Some(Response::Accept) })
            .collect();
        state
            .apply_turn(&TradeOffer::trade(crate::ColorId(0), 1, crate::ColorId(1), 1), &resp)
            .unwrap();
        GameLog::from_state(3, vec!["bayesian".to_string(); 3], &state)
    }

    #[test]
    fn lines_regroup_into_the_same_log() {
        let log = sample_log();
        let back = GameLog::collect_lines(log.lines()).unwrap();
        assert_eq!(back, vec![log]);
    }

    #[test]
    fn json_lines_carry_kind_and_schema() {
        let log = sample_log();
        let lines: Vec<_> = log.lines().map(|l| serde_json::to_string(&l).unwrap()).collect();
        assert!(lines[0].starts_with(r#"{"kind":"header","schema":1,"#), "{}", lines[0]);
        assert!(lines[1].starts_with(r#"{"kind":"turn","schema":1,"#), "{}", lines[1]);
        let parsed: LogLine = serde_json::from_str(&lines[1]).unwrap();
        assert!(matches!(parsed, LogLine::Turn(_)));
    }

    #[test]
    fn rejects_wrong_schema_and_orphans() {
        let mut log = sample_log();
        let mut lines: Vec<_> = log.lines().collect();
        lines.remove(0);
        assert_eq!(GameLog::collect_lines(lines), Err(LogError::Orphan(3)));
        log.header.schema = 2;
        assert_eq!(GameLog::collect_lines(log.lines()), Err(LogError::Schema(2)));
    }
}
