//! Batch simulation and matched-endowment replication.

use std::io::Write;
use std::sync::Arc;

use anyhow::{bail, Context};
use chipbargain_core::agents::{Agent, AgentSpec, Observation, ObservedTurn};
use chipbargain_core::game::{total_welfare, GameConfig, GameState, Offer};
use chipbargain_core::llm::{Degraded, LlmAgent, TranscriptEntry, Transport};
use chipbargain_core::log::GameLog;
use chipbargain_core::pareto::{optimal_allocation, scaled_surplus};
use chipbargain_core::play::{builtin_agent, options_for, play_game};
use chipbargain_core::seed::{game_seed, seat_seed};
use chipbargain_core::analytics::Summary;
use chipbargain_core::{PlayerId, Response, TradeOffer};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::profiles::{ProfileEntry, Profiles};
use crate::transport::HttpTransport;

/// Games are played in parallel in blocks of this size and written in order.
const BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub variant: usize,
    pub seats: Vec<AgentSpec>,
    pub n_games: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if !(2..=4).contains(&self.variant) {
            bail!("variant must be 2, 3 or 4 (got {})", self.variant);
        }
        validate_seats(&self.seats)?;
        if self.n_games == 0 {
            bail!("n_games must be at least 1");
        }
        Ok(())
    }

    pub fn config_for(&self, game_index: u64) -> GameConfig {
        GameConfig::variant(self.variant, game_seed(self.master_seed, game_index))
    }
}

pub fn validate_seats(seats: &[AgentSpec]) -> anyhow::Result<()> {
    if seats.len() != 3 {
        bail!("expected 3 seats, got {}", seats.len());
    }
    if seats.iter().any(AgentSpec::is_human) {
        bail!("human seats can only be used through the play service");
    }
    Ok(())
}

pub type TransportFactory =
    Arc<dyn Fn(&str, &ProfileEntry) -> anyhow::Result<Box<dyn Transport + Send>> + Send + Sync>;

/// Turns agent specs into live agents. LLM seats are looked up in the
/// profile table and connected through the transport factory, which
/// defaults to [`HttpTransport`].
#[derive(Clone)]
pub struct Roster {
    profiles: Profiles,
    transports: TransportFactory,
}

impl Default for Roster {
    fn default() -> Self {
        Roster::new(Profiles::default())
    }
}

impl Roster {
    pub fn new(profiles: Profiles) -> Self {
        Roster {
            profiles,
            transports: Arc::new(|_, p| Ok(Box::new(HttpTransport::from_profile(p)?))),
        }
    }

    pub fn with_transports(mut self, factory: TransportFactory) -> Self {
        self.transports = factory;
        self
    }

    pub fn profiles(&self) -> &Profiles {
        &self.profiles
    }

    /// Fails early if an LLM seat names an unknown profile.
    pub fn check(&self, seats: &[AgentSpec]) -> anyhow::Result<()> {
        for s in seats {
            if let AgentSpec::Llm(name) = s {
                if self.profiles.get(name).is_none() {
                    bail!("no LLM profile named {name:?}");
                }
            }
        }
        Ok(())
    }

    pub fn seat(
        &self,
        spec: &AgentSpec,
        config: &GameConfig,
        seat: PlayerId,
        all: &[AgentSpec],
    ) -> anyhow::Result<Seat> {
        let seed = seat_seed(config.rng_seed, seat.0);
        if let Some(agent) = builtin_agent(spec, config, seat, seed, options_for(all)) {
            return Ok(Seat::Builtin(agent));
        }
        match spec {
            AgentSpec::Llm(name) => {
                let profile = self
                    .profiles
                    .get(name)
                    .with_context(|| format!("no LLM profile named {name:?}"))?;
                let transport = (self.transports)(name, profile)?;
                Ok(Seat::Llm(Box::new(LlmAgent::new(transport, profile.llm_profile()))))
            }
            AgentSpec::Human => Ok(Seat::Human),
            _ => bail!("seat {seat} ({spec}) has no agent"),
        }
    }

    pub fn seats(&self, specs: &[AgentSpec], config: &GameConfig) -> anyhow::Result<Vec<Seat>> {
        specs
            .iter()
            .enumerate()
            .map(|(p, s)| self.seat(s, config, PlayerId(p), specs))
            .collect()
    }
}

/// A live agent in one seat. `Human` is a placeholder whose decisions are
/// supplied from outside; asked directly, it passes and declines.
pub enum Seat {
    Builtin(Box<dyn Agent + Send>),
    Llm(Box<LlmAgent<Box<dyn Transport + Send>>>),
    Human,
}

impl Seat {
    fn inner(&mut self) -> Option<&mut dyn Agent> {
        match self {
            Seat::Builtin(a) => Some(a.as_mut()),
            Seat::Llm(a) => Some(a.as_mut()),
            Seat::Human => None,
        }
    }

    pub fn take_transcript(&mut self) -> Vec<TranscriptEntry> {
        match self {
            Seat::Llm(a) => a.take_transcript(),
            _ => Vec::new(),
        }
    }

    pub fn degraded(&self) -> &[Degraded] {
        match self {
            Seat::Llm(a) => a.degraded(),
            _ => &[],
        }
    }
}

impl Agent for Seat {
    fn kind(&self) -> &str {
        match self {
            Seat::Builtin(a) => a.kind(),
            Seat::Llm(a) => a.kind(),
            Seat::Human => "human",
        }
    }

    fn propose(&mut self, obs: &Observation<'_>) -> TradeOffer {
        self.inner().map_or(TradeOffer::Pass, |a| a.propose(obs))
    }

    fn respond(&mut self, obs: &Observation<'_>, offer: &Offer) -> Response {
        self.inner().map_or(Response::Decline, |a| a.respond(obs, offer))
    }

    fn observe(&mut self, turn: &ObservedTurn<'_>) {
        if let Some(a) = self.inner() {
            a.observe(turn)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub game_id: u64,
    pub seat: PlayerId,
    #[serde(flatten)]
    pub entry: TranscriptEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradedLine {
    pub game_id: u64,
    pub seat: PlayerId,
    #[serde(flatten)]
    pub entry: Degraded,
}

/// One finished game with its side channels.
#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub log: GameLog,
    pub transcripts: Vec<TranscriptLine>,
    pub degraded: Vec<DegradedLine>,
}

/// Plays `state` to the end with `specs` in the seats.
pub fn play_with(
    game_id: u64,
    mut state: GameState,
    specs: &[AgentSpec],
    roster: &Roster,
) -> anyhow::Result<GameOutcome> {
    let mut seats = roster.seats(specs, state.config())?;
    play_game(&mut state, &mut seats)?;
    let names = specs.iter().map(ToString::to_string).collect();
    let mut transcripts = Vec::new();
    let mut degraded = Vec::new();
    for (p, seat) in seats.iter_mut().enumerate() {
        let seat_id = PlayerId(p);
        transcripts.extend(
            seat.take_transcript()
                .into_iter()
                .map(|entry| TranscriptLine { game_id, seat: seat_id, entry }),
        );
        degraded.extend(
            seat.degraded()
                .iter()
                .cloned()
                .map(|entry| DegradedLine { game_id, seat: seat_id, entry }),
        );
    }
    Ok(GameOutcome { log: GameLog::from_state(game_id, names, &state), transcripts, degraded })
}

/// Game `index` of a batch.
pub fn simulate_one(spec: &ExperimentSpec, index: u64, roster: &Roster) -> anyhow::Result<GameOutcome> {
    let state = GameState::new(spec.config_for(index))?;
    play_with(index, state, &spec.seats, roster)
}

/// Re-plays a recorded game's setup with a different population.
pub fn replicate_one(source: &GameLog, seats: &[AgentSpec], roster: &Roster) -> anyhow::Result<GameOutcome> {
    let state = source
        .initial_state()
        .with_context(|| format!("game {} has an unusable setup", source.header.game_id))?;
    play_with(source.header.game_id, state, seats, roster)
}

/// Scaled surplus and related numbers for one game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameScore {
    pub game_id: u64,
    pub scaled_surplus: f64,
    pub degenerate: bool,
    /// Total surplus gain in dollars.
    pub surplus: f64,
    pub trades: usize,
}

pub fn score(log: &GameLog) -> GameScore {
    let h = &log.header;
    let pareto = optimal_allocation(&h.valuations, &h.initial_holdings);
    let final_welfare = total_welfare(&h.valuations, log.final_holdings());
    let s = scaled_surplus(final_welfare, &pareto);
    GameScore {
        game_id: h.game_id,
        scaled_surplus: s.value,
        degenerate: s.degenerate,
        surplus: (final_welfare - pareto.initial_welfare).dollars(),
        trades: log.turns.iter().filter(|t| t.executed).count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub population: String,
    pub variant: usize,
    pub games: usize,
    pub scaled_surplus: Summary,
    pub degenerate_games: usize,
    /// Total surplus gain per game, dollars.
    pub surplus: Summary,
    pub trades: Summary,
    pub degraded_decisions: usize,
}

impl BatchSummary {
    pub fn from_scores(population: String, variant: usize, scores: &[GameScore], degraded: usize) -> Self {
        let col = |f: fn(&GameScore) -> f64| -> Summary {
            Summary::of(&scores.iter().map(f).collect::<Vec<_>>())
        };
        BatchSummary {
            population,
            variant,
            games: scores.len(),
            scaled_surplus: col(|s| s.scaled_surplus),
            degenerate_games: scores.iter().filter(|s| s.degenerate).count(),
            surplus: col(|s| s.surplus),
            trades: col(|s| s.trades as f64),
            degraded_decisions: degraded,
        }
    }

    /// `mean (se)` of scaled surplus, two decimals.
    pub fn headline(&self) -> String {
        format!("{:.2} ({:.2})", self.scaled_surplus.mean, self.scaled_surplus.se)
    }
}

pub fn population_name(seats: &[AgentSpec]) -> String {
    seats.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Where a batch writes its output. Each game's log lines go to `logs` in
/// game order.
pub struct Sinks<'a> {
    pub logs: &'a mut dyn FnMut(&GameLog) -> anyhow::Result<()>,
    pub transcripts: Option<&'a mut dyn Write>,
}

/// Runs `jobs` in parallel blocks, feeding results to `sinks` in job order.
fn run_jobs<J: Sync>(
    jobs: &[J],
    play: impl Fn(&J) -> anyhow::Result<GameOutcome> + Sync,
    sinks: &mut Sinks<'_>,
) -> anyhow::Result<(Vec<GameScore>, usize)> {
    let mut scores = Vec::with_capacity(jobs.len());
    let mut degraded = 0;
    for block in jobs.chunks(BLOCK) {
        let outcomes: Vec<anyhow::Result<GameOutcome>> = block.par_iter().map(&play).collect();
        for outcome in outcomes {
            let outcome = outcome?;
            (sinks.logs)(&outcome.log)?;
            if let Some(out) = sinks.transcripts.as_deref_mut() {
                for line in &outcome.transcripts {
                    serde_json::to_writer(&mut *out, line)?;
                    out.write_all(b"\n")?;
                }
            }
            degraded += outcome.degraded.len();
            scores.push(score(&outcome.log));
        }
    }
    Ok((scores, degraded))
}

pub fn run_batch(spec: &ExperimentSpec, roster: &Roster, sinks: &mut Sinks<'_>) -> anyhow::Result<BatchSummary> {
    spec.validate()?;
    roster.check(&spec.seats)?;
    let jobs: Vec<u64> = (0..spec.n_games as u64).collect();
    let (scores, degraded) = run_jobs(&jobs, |&k| simulate_one(spec, k, roster), sinks)?;
    Ok(BatchSummary::from_scores(population_name(&spec.seats), spec.variant, &scores, degraded))
}

pub fn replicate(
    sources: &[GameLog],
    seats: &[AgentSpec],
    roster: &Roster,
    sinks: &mut Sinks<'_>,
) -> anyhow::Result<BatchSummary> {
    validate_seats(seats)?;
    roster.check(seats)?;
    let variant = sources.first().map_or(0, GameLog::n_colors);
    let (scores, degraded) = run_jobs(sources, |log| replicate_one(log, seats, roster), sinks)?;
    Ok(BatchSummary::from_scores(population_name(seats), variant, &scores, degraded))
}

/// Convenience for tests and library callers: a batch kept in memory.
pub fn simulate_in_memory(spec: &ExperimentSpec, roster: &Roster) -> anyhow::Result<(Vec<GameLog>, BatchSummary)> {
    let mut logs = Vec::new();
    let mut push = |l: &GameLog| {
        logs.push(l.clone());
        Ok(())
    };
    let summary = run_batch(spec, roster, &mut Sinks { logs: &mut push, transcripts: None })?;
    Ok((logs, summary))
}

pub fn replicate_in_memory(
    sources: &[GameLog],
    seats: &[AgentSpec],
    roster: &Roster,
) -> anyhow::Result<(Vec<GameLog>, BatchSummary)> {
    let mut logs = Vec::new();
    let mut push = |l: &GameLog| {
        logs.push(l.clone());
        Ok(())
    };
    let summary = replicate(sources, seats, roster, &mut Sinks { logs: &mut push, transcripts: None })?;
    Ok((logs, summary))
}
