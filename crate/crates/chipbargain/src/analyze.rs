//! Turns game logs into CSV tables and a JSON summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use chipbargain_core::analytics::{
    classify_actions, summarize, surplus_trajectory, trade_points, RegretKind, Role, Summary,
    TradeSpaceSummary,
};
use chipbargain_core::log::GameLog;
use chipbargain_core::pareto::optimal_allocation;
use serde::{Deserialize, Serialize};

use crate::harness::score;

#[derive(Debug, Serialize)]
struct TradeRow<'a> {
    population: &'a str,
    variant: usize,
    game_id: u64,
    turn: u32,
    proposer: usize,
    net_surplus: f64,
    trade_ratio: f64,
    accepted: bool,
}

#[derive(Debug, Serialize)]
struct RegretRow<'a> {
    population: &'a str,
    variant: usize,
    game_id: u64,
    turn: u32,
    player: usize,
    role: Role,
    label: RegretKind,
    reason: String,
    counterfactual_gain: f64,
    evidence: String,
}

#[derive(Debug, Serialize)]
struct TrajectoryRow<'a> {
    population: &'a str,
    variant: usize,
    game_id: u64,
    turn: usize,
    scaled_surplus: f64,
}

/// Label counts for one role.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretCounts {
    pub no_regret: usize,
    pub forced_regret: usize,
    pub unforced_regret: usize,
    pub unscored: usize,
}

impl RegretCounts {
    fn add(&mut self, kind: RegretKind) {
        match kind {
            RegretKind::NoRegret => self.no_regret += 1,
            RegretKind::ForcedRegret => self.forced_regret += 1,
            RegretKind::UnforcedRegret => self.unforced_regret += 1,
            RegretKind::Unscored => self.unscored += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub population: String,
    pub variant: usize,
    pub games: usize,
    pub scaled_surplus: Summary,
    pub degenerate_games: usize,
    pub trade_space: TradeSpaceSummary,
    pub regret: BTreeMap<String, RegretCounts>,
    /// Mean scaled surplus after each turn, starting before the first.
    pub mean_trajectory: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub schema: u32,
    pub groups: Vec<GroupSummary>,
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Proposer => "proposer",
        Role::Acceptor => "acceptor",
        Role::Decliner => "decliner",
    }
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

/// Writes `trade_space.csv`, `regret.csv`, `trajectories.csv` and
/// `summary.json` into `out_dir`.
pub fn analyze(logs: &[GameLog], out_dir: &Path) -> anyhow::Result<AnalysisSummary> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let csv_at = |name: &str| {
        let p = out_dir.join(name);
        csv::Writer::from_path(&p).with_context(|| format!("creating {}", p.display()))
    };
    let mut trades = csv_at("trade_space.csv")?;
    let mut regrets = csv_at("regret.csv")?;
    let mut trajectories = csv_at("trajectories.csv")?;

    let mut groups: BTreeMap<(String, usize), Vec<&GameLog>> = BTreeMap::new();
    for log in logs {
        let key = (log.header.seats.join(","), log.n_colors());
        groups.entry(key).or_default().push(log);
    }

    let mut out = Vec::new();
    for ((population, variant), games) in &groups {
        let (population, variant) = (population.as_str(), *variant);
        let mut points = Vec::new();
        let mut regret: BTreeMap<String, RegretCounts> = BTreeMap::new();
        let mut scores = Vec::new();
        let mut traj_sum: Vec<f64> = Vec::new();
        for log in games {
            let game_id = log.header.game_id;
            for p in trade_points(log) {
                trades.serialize(TradeRow {
                    population,
                    variant,
                    game_id,
                    turn: p.turn,
                    proposer: p.proposer.0,
                    net_surplus: p.net_surplus.dollars(),
                    trade_ratio: p.trade_ratio,
                    accepted: p.accepted,
                })?;
                points.push(p);
            }
            for l in classify_actions(log) {
                regret.entry(role_name(l.role).to_string()).or_default().add(l.label);
                regrets.serialize(RegretRow {
                    population,
                    variant,
                    game_id,
                    turn: l.turn,
                    player: l.player.0,
                    role: l.role,
                    label: l.label,
                    reason: l.reason.as_ref().map(enum_name).unwrap_or_default(),
                    counterfactual_gain: l.counterfactual_gain.dollars(),
                    evidence: l.evidence.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
                })?;
            }
            let pareto = optimal_allocation(&log.header.valuations, &log.header.initial_holdings);
            let traj = surplus_trajectory(log, &pareto);
            if traj_sum.len() < traj.len() {
                traj_sum.resize(traj.len(), 0.0);
            }
            for (t, v) in traj.iter().enumerate() {
                traj_sum[t] += v;
                trajectories.serialize(TrajectoryRow {
                    population,
                    variant,
                    game_id,
                    turn: t,
                    scaled_surplus: *v,
                })?;
            }
            scores.push(score(log));
        }
        let scaled: Vec<f64> = scores.iter().map(|s| s.scaled_surplus).collect();
        out.push(GroupSummary {
            population: population.to_string(),
            variant,
            games: games.len(),
            scaled_surplus: Summary::of(&scaled),
            degenerate_games: scores.iter().filter(|s| s.degenerate).count(),
            trade_space: summarize(&points),
            regret,
            mean_trajectory: traj_sum.iter().map(|v| v / games.len() as f64).collect(),
        });
    }
    trades.flush()?;
    regrets.flush()?;
    trajectories.flush()?;

    let summary = AnalysisSummary { schema: 1, groups: out };
    let path = out_dir.join("summary.json");
    fs::write(&path, serde_json::to_vec_pretty(&summary)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(summary)
}
