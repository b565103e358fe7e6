//! HTTP play service: one human seat against two agents per session.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create a game, returns the human view |
//! | GET | `/sessions/{id}/view` | human view |
//! | POST | `/sessions/{id}/proposal` | `{"give_color","give_qty","get_color","get_qty"}` or `{"pass":true}` |
//! | POST | `/sessions/{id}/response` | `{"choice":"accept"}` or `{"choice":"decline"}` |
//! | GET | `/sessions/{id}/preview?offer=green:2,red:1` | value change of giving 2 green for 1 red; without `offer`, of accepting the offer on the table |
//! | GET | `/sessions/{id}/events?since=N&wait_ms=M` | events after `N`, long-polling up to `M` ms |
//!
//! Agent decisions are played in the background with a pause before each
//! one. Errors are `{"error": code, "message": text}` with status 400
//! (malformed request), 404 (unknown session), 409 (wrong phase) or 422
//! (illegal offer or accept, `error` is the violation).

mod session;

pub use session::{
    ActionError, ActiveOffer, Awaiting, Event, EventKind, FailReason, HumanView, Payout, Preview,
    PreviewRole, Session, SCHEMA,
};

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chipbargain_core::agents::AgentSpec;
use chipbargain_core::game::{GameConfig, OfferViolation};
use chipbargain_core::{Offer, PlayerId, TradeOffer};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{Mutex, Notify};

use crate::harness::Roster;
use crate::io::append_game;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub session_ttl: Duration,
    pub agent_delay: Duration,
    /// Agents used when a create request names none.
    pub default_agents: Vec<AgentSpec>,
    /// Finished games are appended to `sessions.jsonl` here.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            session_ttl: Duration::from_secs(3600),
            agent_delay: Duration::from_millis(800),
            default_agents: vec![AgentSpec::Bayesian, AgentSpec::Bayesian],
            log_dir: None,
        }
    }
}

struct Handle {
    session: Mutex<Session>,
    notify: Notify,
    driving: AtomicBool,
    touched: std::sync::Mutex<Instant>,
    logged: AtomicBool,
}

impl Handle {
    fn touch(&self) {
        *self.touched.lock().unwrap() = Instant::now();
    }

    fn idle(&self) -> Duration {
        self.touched.lock().unwrap().elapsed()
    }
}

pub struct Service {
    config: ServiceConfig,
    roster: Roster,
    sessions: std::sync::Mutex<HashMap<u64, Arc<Handle>>>,
}

pub type AppState = Arc<Service>;

impl Service {
    pub fn new(config: ServiceConfig, roster: Roster) -> AppState {
        Arc::new(Service { config, roster, sessions: Default::default() })
    }

    fn get(&self, id: &str) -> Result<Arc<Handle>, ApiError> {
        let id = u64::from_str_radix(id, 16).map_err(|_| ApiError::not_found())?;
        let h = self.sessions.lock().unwrap().get(&id).cloned().ok_or_else(ApiError::not_found)?;
        h.touch();
        Ok(h)
    }

    fn flush_log(&self, h: &Handle, s: &Session) {
        if !s.is_ended() || h.logged.swap(true, Ordering::SeqCst) {
            return;
        }
        if let Some(dir) = &self.config.log_dir {
            if let Err(e) = append_game(&dir.join("sessions.jsonl"), &s.log()) {
                tracing::error!("could not write log for session {}: {e}", s.id_string());
            }
        }
    }
}

/// Plays agent decisions for `h` in the background until the human must act.
fn drive(app: AppState, h: Arc<Handle>) {
    if h.driving.swap(true, Ordering::SeqCst) {
        return;
    }
    tokio::spawn(async move {
        loop {
            while h.session.lock().await.awaiting() == Awaiting::Agents {
                tokio::time::sleep(app.config.agent_delay).await;
                let h2 = h.clone();
                let app2 = app.clone();
                let step = tokio::task::spawn_blocking(move || {
                    let mut s = h2.session.blocking_lock();
                    let r = s.agent_step();
                    if r.is_err() {
                        s.abandon();
                    }
                    app2.flush_log(&h2, &s);
                    r
                })
                .await;
                h.notify.notify_waiters();
                match step {
                    Ok(Ok(())) => {}
                    Ok(Err(e)) => tracing::error!("agent step failed: {e:#}"),
                    Err(e) => tracing::error!("agent task panicked: {e}"),
                }
            }
            h.driving.store(false, Ordering::SeqCst);
            // a human action may have landed after the last check
            if h.session.lock().await.awaiting() != Awaiting::Agents
                || h.driving.swap(true, Ordering::SeqCst)
            {
                break;
            }
        }
    });
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", "no such session")
    }

    fn invalid(v: OfferViolation) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, violation_code(v), v.to_string())
    }
}

impl From<ActionError> for ApiError {
    fn from(e: ActionError) -> Self {
        match e {
            ActionError::Conflict(code) => {
                ApiError::new(StatusCode::CONFLICT, code, code.replace('_', " "))
            }
            ActionError::Invalid(v) => ApiError::invalid(v),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"schema": SCHEMA, "error": self.code, "message": self.message})))
            .into_response()
    }
}

pub fn violation_code(v: OfferViolation) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => "invalid_offer".to_string(),
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    let body: &[u8] = if body.is_empty() { b"{}" } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    variant: Option<usize>,
    agents: Option<Vec<String>>,
    human_seat: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Created {
    schema: u32,
    session_id: String,
    view: HumanView,
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse_body(&body)?;
    let variant = req.variant.unwrap_or(3);
    if !(2..=4).contains(&variant) {
        return Err(ApiError::bad_request(format!("variant must be 2, 3 or 4, got {variant}")));
    }
    let agents = match &req.agents {
        Some(a) => a
            .iter()
            .map(|s| s.parse::<AgentSpec>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ApiError::bad_request(e.to_string()))?,
        None => app.config.default_agents.clone(),
    };
    let human = PlayerId(req.human_seat.unwrap_or(0));
    let seed = req.seed.unwrap_or_else(rand::random);
    let id = loop {
        let id: u64 = rand::random();
        if !app.sessions.lock().unwrap().contains_key(&id) {
            break id;
        }
    };
    let roster = app.roster.clone();
    let session = tokio::task::spawn_blocking(move || {
        Session::new(id, GameConfig::variant(variant, seed), human, &agents, &roster)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
    .map_err(|e| ApiError::bad_request(format!("{e:#}")))?;
    let view = session.view();
    let h = Arc::new(Handle {
        session: Mutex::new(session),
        notify: Notify::new(),
        driving: AtomicBool::new(false),
        touched: std::sync::Mutex::new(Instant::now()),
        logged: AtomicBool::new(false),
    });
    app.sessions.lock().unwrap().insert(id, h.clone());
    drive(app.clone(), h);
    let body = Created { schema: SCHEMA, session_id: view.session_id.clone(), view };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_view(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<HumanView>, ApiError> {
    let h = app.get(&id)?;
    let view = h.session.lock().await.view();
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProposalBody {
    #[serde(default)]
    pass: bool,
    give_color: Option<String>,
    give_qty: Option<u32>,
    get_color: Option<String>,
    get_qty: Option<u32>,
}

#[derive(Debug, Serialize)]
struct ActionResult {
    schema: u32,
    events: Vec<Event>,
    view: HumanView,
}

fn color(config: &GameConfig, name: &str) -> Result<chipbargain_core::ColorId, ApiError> {
    config
        .color_by_name(name.trim())
        .ok_or_else(|| ApiError::invalid(OfferViolation::UnknownColor))
}

fn proposal_offer(config: &GameConfig, body: &ProposalBody) -> Result<TradeOffer, ApiError> {
    if body.pass {
        return Ok(TradeOffer::Pass);
    }
    let missing = || ApiError::bad_request("give_color, give_qty, get_color and get_qty are required");
    Ok(TradeOffer::trade(
        color(config, body.give_color.as_deref().ok_or_else(missing)?)?,
        body.give_qty.ok_or_else(missing)?,
        color(config, body.get_color.as_deref().ok_or_else(missing)?)?,
        body.get_qty.ok_or_else(missing)?,
    ))
}

async fn act(
    app: AppState,
    h: Arc<Handle>,
    f: impl FnOnce(&mut Session) -> Result<(), ApiError>,
) -> Result<Json<ActionResult>, ApiError> {
    let result = {
        let mut s = h.session.lock().await;
        let before = s.last_seq();
        f(&mut s)?;
        ActionResult { schema: SCHEMA, events: s.events_since(before).to_vec(), view: s.view() }
    };
    h.notify.notify_waiters();
    drive(app, h);
    Ok(Json(result))
}

async fn post_proposal(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ActionResult>, ApiError> {
    let h = app.get(&id)?;
    let body: ProposalBody = parse_body(&body)?;
    act(app, h, |s| {
        let offer = proposal_offer(s.state().config(), &body)?;
        Ok(s.submit_proposal(offer)?)
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Choice {
    Accept,
    Decline,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseBody {
    choice: Choice,
}

async fn post_response(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ActionResult>, ApiError> {
    let h = app.get(&id)?;
    let body: ResponseBody = parse_body(&body)?;
    let r = match body.choice {
        Choice::Accept => chipbargain_core::Response::Accept,
        Choice::Decline => chipbargain_core::Response::Decline,
    };
    act(app, h, |s| Ok(s.submit_response(r)?)).await
}

#[derive(Debug, Deserialize)]
struct PreviewQuery {
    offer: Option<String>,
}

/// Parses `give_color:qty,get_color:qty`.
pub fn parse_offer_query(config: &GameConfig, text: &str) -> Result<Offer, ApiError> {
    let bad = || ApiError::bad_request(format!("offer must look like green:2,red:1, got {text:?}"));
    let (give, get) = text.split_once(',').ok_or_else(bad)?;
    let side = |s: &str| -> Result<(chipbargain_core::ColorId, u32), ApiError> {
        let (c, q) = s.split_once(':').ok_or_else(bad)?;
        let q = q.trim().parse::<u32>().map_err(|_| bad())?;
        Ok((color(config, c)?, q))
    };
    let (gc, gq) = side(give)?;
    let (tc, tq) = side(get)?;
    Ok(Offer::new(gc, gq, tc, tq))
}

async fn get_preview(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> Result<Json<Preview>, ApiError> {
    let h = app.get(&id)?;
    let s = h.session.lock().await;
    let offer = q.offer.as_deref().map(|t| parse_offer_query(s.state().config(), t)).transpose()?;
    Ok(Json(s.preview(offer)?))
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    #[serde(default)]
    since: u64,
    #[serde(default)]
    wait_ms: u64,
}

#[derive(Debug, Serialize)]
struct EventsPage {
    schema: u32,
    events: Vec<Event>,
    last_seq: u64,
}

async fn get_events(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<EventsQuery>,
) -> Result<Json<EventsPage>, ApiError> {
    let h = app.get(&id)?;
    let deadline = tokio::time::Instant::now() + Duration::from_millis(q.wait_ms.min(60_000));
    loop {
        let notified = h.notify.notified();
        tokio::pin!(notified);
        notified.as_mut().enable();
        let (events, last_seq, ended) = {
            let s = h.session.lock().await;
            (s.events_since(q.since).to_vec(), s.last_seq(), s.is_ended())
        };
        if !events.is_empty() || ended || tokio::time::Instant::now() >= deadline {
            return Ok(Json(EventsPage { schema: SCHEMA, events, last_seq }));
        }
        let _ = tokio::time::timeout_at(deadline, notified).await;
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"schema": SCHEMA, "status": "ok"}))
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/view", get(get_view))
        .route("/sessions/{id}/proposal", post(post_proposal))
        .route("/sessions/{id}/response", post(post_response))
        .route("/sessions/{id}/preview", get(get_preview))
        .route("/sessions/{id}/events", get(get_events))
        .with_state(app)
}

/// Ends idle sessions as abandoned and forgets them a TTL later.
pub async fn reap_once(app: &AppState) {
    let ttl = app.config.session_ttl;
    let handles: Vec<(u64, Arc<Handle>)> =
        app.sessions.lock().unwrap().iter().map(|(k, v)| (*k, v.clone())).collect();
    for (id, h) in handles {
        let idle = h.idle();
        if idle < ttl {
            continue;
        }
        let mut s = h.session.lock().await;
        if !s.is_ended() {
            tracing::info!("session {} abandoned after {:?} idle", s.id_string(), idle);
            s.abandon();
            app.flush_log(&h, &s);
            drop(s);
            h.notify.notify_waiters();
        } else if idle >= ttl * 2 {
            app.sessions.lock().unwrap().remove(&id);
        }
    }
}

pub async fn serve(config: ServiceConfig, roster: Roster) -> anyhow::Result<()> {
    let bind = config.bind;
    let tick = (config.session_ttl / 4).clamp(Duration::from_millis(100), Duration::from_secs(30));
    let app = Service::new(config, roster);
    let reaper = app.clone();
    tokio::spawn(async move {
        let mut every = tokio::time::interval(tick);
        loop {
            every.tick().await;
            reap_once(&reaper).await;
        }
    });
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
