use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use chipbargain::analyze::analyze;
use chipbargain::harness::{self, BatchSummary, ExperimentSpec, Roster, Sinks};
use chipbargain::io::{read_logs, write_game, LogWriter};
use chipbargain::profiles::Profiles;
use chipbargain::service::{self, ServiceConfig};
use chipbargain_core::agents::AgentSpec;
use chipbargain_core::analytics::{expected_rational_trades, ComplexityOptions, OpponentRule, Sampling};
use chipbargain_core::game::{total_welfare, GameConfig};
use chipbargain_core::log::GameLog;
use chipbargain_core::pareto::{optimal_allocation, scaled_surplus, ParetoResult};
use chipbargain_core::{AllocationMatrix, ValuationProfile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Three-seat chip bargaining: simulation, analysis and a play service.
#[derive(Debug, Parser)]
#[command(name = "chipbargain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play a batch of seeded games and write their logs as JSON Lines.
    Simulate(SimulateArgs),
    /// Re-play recorded games with a different population on the same endowments.
    Replicate(ReplicateArgs),
    /// Write trade-space, regret and trajectory tables plus a summary.
    Analyze(AnalyzeArgs),
    /// Welfare upper bound of recorded games or of an explicit instance.
    Pareto(ParetoArgs),
    /// Estimate the number of myopically rational offers per turn.
    Complexity(ComplexityArgs),
    /// Run the HTTP play service.
    Serve(ServeArgs),
}

/// A comma-separated list of agent specs.
#[derive(Debug, Clone)]
struct SpecList(Vec<AgentSpec>);

fn parse_seats(s: &str) -> Result<SpecList, String> {
    let seats = AgentSpec::parse_list(s).map_err(|e| e.to_string())?;
    harness::validate_seats(&seats).map_err(|e| e.to_string())?;
    Ok(SpecList(seats))
}

fn parse_agents(s: &str) -> Result<SpecList, String> {
    let seats = AgentSpec::parse_list(s).map_err(|e| e.to_string())?;
    if seats.len() != 2 || seats.iter().any(AgentSpec::is_human) {
        return Err("expected two non-human agent specs".into());
    }
    Ok(SpecList(seats))
}

#[derive(Debug, Args)]
struct LlmArgs {
    /// TOML file with `[profiles.NAME]` tables for `llm:NAME` seats.
    #[arg(long, env = "CHIPBARGAIN_PROFILES")]
    profiles: Option<PathBuf>,
    /// Append every LLM prompt and reply to this JSON Lines file.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

impl LlmArgs {
    fn roster(&self) -> anyhow::Result<Roster> {
        Ok(Roster::new(match &self.profiles {
            Some(p) => Profiles::load(p)?,
            None => Profiles::default(),
        }))
    }
}

#[derive(Debug, Args)]
struct BatchOut {
    /// Log file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Also write the batch summary as JSON to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Number of chip colors.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
    variant: u8,
    /// Comma-separated agent per seat: bayesian, greedy, random or llm:PROFILE.
    #[arg(long, default_value = "bayesian,bayesian,bayesian", value_parser = parse_seats)]
    seats: SpecList,
    /// Number of games.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Master seed; game k is seeded from (seed, k).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: BatchOut,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    /// Source logs.
    #[arg(long)]
    from: PathBuf,
    /// Population for the replicas.
    #[arg(long, value_parser = parse_seats)]
    seats: SpecList,
    #[command(flatten)]
    output: BatchOut,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Logs to analyze.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ParetoSource {
    /// Logs whose game setups to solve.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// JSON file `{"valuations": [[cents]], "initial": [[chips]]}`.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[command(flatten)]
    source: ParetoSource,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Drawn,
    PriorSupport,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplingArg {
    Grid,
    Continuous,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    /// Number of colors; all three variants when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
    variant: Option<u8>,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which opponents count as willing to accept.
    #[arg(long, value_enum, default_value_t = RuleArg::Drawn)]
    rule: RuleArg,
    /// How private values are drawn.
    #[arg(long, value_enum, default_value_t = SamplingArg::Grid)]
    sampling: SamplingArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Listen address.
    #[arg(long, env = "CHIPBARGAIN_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Overrides the port of `--bind`.
    #[arg(long)]
    port: Option<u16>,
    /// Idle time after which a session is ended as abandoned.
    #[arg(long, env = "CHIPBARGAIN_SESSION_TTL_SECS", default_value_t = 3600)]
    session_ttl_secs: u64,
    /// Pause before each agent decision.
    #[arg(long, env = "CHIPBARGAIN_AGENT_DELAY_MS", default_value_t = 800)]
    agent_delay_ms: u64,
    /// The two agents used when a session request names none.
    #[arg(long, env = "CHIPBARGAIN_DEFAULT_AGENTS", default_value = "bayesian,bayesian", value_parser = parse_agents)]
    agents: SpecList,
    /// Append finished games to `sessions.jsonl` in this directory.
    #[arg(long, env = "CHIPBARGAIN_LOG_DIR")]
    log_dir: Option<PathBuf>,
    /// TOML file with LLM profiles.
    #[arg(long, env = "CHIPBARGAIN_PROFILES")]
    profiles: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Replicate(a) => replicate(a),
        Command::Analyze(a) => {
            let logs = read_logs(&a.input)?;
            let summary = analyze(&logs, &a.out)?;
            for g in &summary.groups {
                println!(
                    "{} {}-chip: {} games, scaled surplus {:.2} ({:.2}), rejection rate {:.2}",
                    g.population,
                    g.variant,
                    g.games,
                    g.scaled_surplus.mean,
                    g.scaled_surplus.se,
                    g.trade_space.rejection_rate
                );
            }
            Ok(())
        }
        Command::Pareto(a) => pareto(a),
        Command::Complexity(a) => complexity(a),
        Command::Serve(a) => serve(a),
    }
}

fn set_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Runs `body` with a log sink writing to `out` (a file, or stdout for `-`).
fn with_log_sink(
    out: &Path,
    transcripts: Option<&Path>,
    body: impl FnOnce(&mut Sinks<'_>) -> anyhow::Result<BatchSummary>,
) -> anyhow::Result<BatchSummary> {
    let mut transcript_file = match transcripts {
        Some(p) => Some(BufWriter::new(
            File::options()
                .create(true)
                .append(true)
                .open(p)
                .with_context(|| format!("opening {}", p.display()))?,
        )),
        None => None,
    };
    let summary = if out == Path::new("-") {
        let stdout = io::stdout();
        let mut lock = BufWriter::new(stdout.lock());
        let mut write = |l: &GameLog| Ok(write_game(&mut lock, l)?);
        let summary = body(&mut Sinks {
            logs: &mut write,
            transcripts: transcript_file.as_mut().map(|w| w as &mut dyn Write),
        })?;
        lock.flush()?;
        summary
    } else {
        let mut writer = LogWriter::create(out)?;
        let mut write = |l: &GameLog| Ok(writer.write(l)?);
        let summary = body(&mut Sinks {
            logs: &mut write,
            transcripts: transcript_file.as_mut().map(|w| w as &mut dyn Write),
        })?;
        writer.finish()?;
        summary
    };
    if let Some(mut t) = transcript_file {
        t.flush()?;
    }
    Ok(summary)
}

fn report(summary: &BatchSummary, path: Option<&Path>) -> anyhow::Result<()> {
    eprintln!(
        "{} {}-chip: {} games, scaled surplus {}, {} degenerate, {} degraded LLM decisions",
        summary.population,
        summary.variant,
        summary.games,
        summary.headline(),
        summary.degenerate_games,
        summary.degraded_decisions
    );
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_vec_pretty(summary)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    set_threads(a.output.threads)?;
    let spec = ExperimentSpec {
        variant: a.variant as usize,
        seats: a.seats.0,
        n_games: a.n as usize,
        master_seed: a.seed,
    };
    let roster = a.llm.roster()?;
    let summary = with_log_sink(&a.output.out, a.llm.transcripts.as_deref(), |sinks| {
        harness::run_batch(&spec, &roster, sinks)
    })?;
    report(&summary, a.output.summary.as_deref())
}

fn replicate(a: ReplicateArgs) -> anyhow::Result<()> {
    set_threads(a.output.threads)?;
    let sources = read_logs(&a.from)?;
    anyhow::ensure!(!sources.is_empty(), "{} holds no games", a.from.display());
    let roster = a.llm.roster()?;
    let summary = with_log_sink(&a.output.out, a.llm.transcripts.as_deref(), |sinks| {
        harness::replicate(&sources, &a.seats.0, &roster, sinks)
    })?;
    report(&summary, a.output.summary.as_deref())
}

#[derive(Debug, Deserialize)]
struct Instance {
    valuations: ValuationProfile,
    initial: AllocationMatrix,
}

#[derive(Debug, Serialize)]
struct ParetoRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    game_id: Option<u64>,
    initial_welfare: f64,
    w_star: f64,
    headroom: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_welfare: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaled_surplus: Option<f64>,
    optimal_allocation: Vec<Vec<f64>>,
}

fn pareto_row(game_id: Option<u64>, p: ParetoResult, final_welfare: Option<chipbargain_core::Cents>) -> ParetoRow {
    ParetoRow {
        game_id,
        initial_welfare: p.initial_welfare.dollars(),
        w_star: p.w_star / 100.0,
        headroom: p.headroom() / 100.0,
        final_welfare: final_welfare.map(|c| c.dollars()),
        scaled_surplus: final_welfare.map(|c| scaled_surplus(c, &p).value),
        optimal_allocation: p.optimal_allocation,
    }
}

fn pareto(a: ParetoArgs) -> anyhow::Result<()> {
    let rows: Vec<ParetoRow> = if let Some(path) = &a.source.input {
        read_logs(path)?
            .iter()
            .map(|log| {
                let h = &log.header;
                let p = optimal_allocation(&h.valuations, &h.initial_holdings);
                let fin = total_welfare(&h.valuations, log.final_holdings());
                pareto_row(Some(h.game_id), p, Some(fin))
            })
            .collect()
    } else {
        let path = a.source.instance.as_ref().expect("clap enforces one source");
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let inst: Instance = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        anyhow::ensure!(
            inst.valuations.0.len() == inst.initial.0.len()
                && inst.valuations.0.iter().zip(&inst.initial.0).all(|(v, h)| v.len() == h.len()),
            "valuations and initial holdings have different shapes"
        );
        vec![pareto_row(None, optimal_allocation(&inst.valuations, &inst.initial), None)]
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match a.format {
        Format::Json => {
            for r in &rows {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
        }
        Format::Table => {
            writeln!(out, "{:>20} {:>9} {:>9} {:>9} {:>9} {:>7}", "game", "initial", "w_star", "headroom", "final", "scaled")?;
            for r in &rows {
                let dash = || "-".to_string();
                writeln!(
                    out,
                    "{:>20} {:>9.2} {:>9.2} {:>9.2} {:>9} {:>7}",
                    r.game_id.map_or_else(dash, |g| g.to_string()),
                    r.initial_welfare,
                    r.w_star,
                    r.headroom,
                    r.final_welfare.map_or_else(dash, |f| format!("{f:.2}")),
                    r.scaled_surplus.map_or_else(dash, |s| format!("{s:.3}")),
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ComplexityRow {
    variant: usize,
    samples: usize,
    mean: f64,
    se: f64,
}

fn complexity(a: ComplexityArgs) -> anyhow::Result<()> {
    let options = ComplexityOptions {
        rule: match a.rule {
            RuleArg::Drawn => OpponentRule::Drawn,
            RuleArg::PriorSupport => OpponentRule::PriorSupport,
        },
        sampling: match a.sampling {
            SamplingArg::Grid => Sampling::Grid,
            SamplingArg::Continuous => Sampling::Continuous,
        },
    };
    let variants: Vec<usize> = match a.variant {
        Some(v) => vec![v as usize],
        None => vec![2, 3, 4],
    };
    for v in variants {
        let config = GameConfig::variant(v, a.seed);
        let s = expected_rational_trades(&config, a.samples as usize, a.seed, options);
        let row = ComplexityRow { variant: v, samples: s.n, mean: s.mean, se: s.se };
        match a.format {
            Format::Json => println!("{}", serde_json::to_string(&row)?),
            Format::Table => println!("{}-chip: {:.1} (se {:.2}) over {} samples", v, row.mean, row.se, row.samples),
        }
    }
    Ok(())
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let mut bind = a.bind;
    if let Some(p) = a.port {
        bind.set_port(p);
    }
    let config = ServiceConfig {
        bind,
        session_ttl: Duration::from_secs(a.session_ttl_secs),
        agent_delay: Duration::from_millis(a.agent_delay_ms),
        default_agents: a.agents.0,
        log_dir: a.log_dir,
    };
    let roster = Roster::new(match &a.profiles {
        Some(p) => Profiles::load(p)?,
        None => Profiles::default(),
    });
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(service::serve(config, roster))
}
