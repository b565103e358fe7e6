use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use chipbargain::harness::Roster;
use chipbargain::profiles::Profiles;
use chipbargain::service::{reap_once, router, AppState, Service, ServiceConfig};
use chipbargain_core::agents::{Agent, AgentSpec, Observation};
use chipbargain_core::game::{GameConfig, GameState};
use chipbargain_core::llm::{ChatRequest, Transport, TransportError};
use chipbargain_core::play::{builtin_agent, options_for, play_game};
use chipbargain_core::seed::seat_seed;
use chipbargain_core::{Cents, Offer, PlayerId, Response, TradeOffer, TurnRecord};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn config() -> ServiceConfig {
    ServiceConfig { agent_delay: Duration::ZERO, ..ServiceConfig::default() }
}

fn app() -> AppState {
    Service::new(config(), Roster::default())
}

async fn call(app: &AppState, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let body = body.map_or_else(Body::empty, |b| Body::from(b.to_string()));
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(body).unwrap();
    let resp = router(app.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &AppState, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

/// Waits until the human has to act or the game is over.
async fn settle(app: &AppState, id: &str) -> Value {
    for _ in 0..200 {
        let (status, view) = call(app, Method::GET, &format!("/sessions/{id}/view"), None).await;
        assert_eq!(status, StatusCode::OK);
        if view["phase"] != "waiting" {
            return view;
        }
        let since = view["last_seq"].as_u64().unwrap();
        call(app, Method::GET, &format!("/sessions/{id}/events?since={since}&wait_ms=500"), None).await;
    }
    panic!("session {id} never settled");
}

/// A simple human: offers one green for one unit of its favourite color
/// and accepts offers that strictly raise its value.
async fn play_out(app: &AppState, id: &str) -> Value {
    loop {
        let view = settle(app, id).await;
        match view["phase"].as_str().unwrap() {
            "ended" => return view,
            "your_proposal" => {
                let me = view["seat"].as_u64().unwrap() as usize;
                let values: Vec<i64> = serde_json::from_value(view["my_values"].clone()).unwrap();
                let best = (1..values.len()).max_by_key(|&c| values[c]).unwrap();
                let colors = &view["colors"];
                let body = if view["holdings"][me][0].as_u64().unwrap() > 0 {
                    json!({"give_color": colors[0], "give_qty": 1, "get_color": colors[best], "get_qty": 1})
                } else {
                    json!({"pass": true})
                };
                let (status, v) = call(app, Method::POST, &format!("/sessions/{id}/proposal"), Some(body)).await;
                assert_eq!(status, StatusCode::OK, "{v}");
            }
            "your_response" => {
                let (_, p) = call(app, Method::GET, &format!("/sessions/{id}/preview"), None).await;
                let yes = p["valid"] == true && p["value_change"].as_i64().unwrap() > 0;
                let body = json!({"choice": if yes { "accept" } else { "decline" }});
                let (status, v) = call(app, Method::POST, &format!("/sessions/{id}/response"), Some(body)).await;
                assert_eq!(status, StatusCode::OK, "{v}");
            }
            other => panic!("unexpected phase {other}"),
        }
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn health() {
    let (status, v) = call(&app(), Method::GET, "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
}

#[tokio::test(flavor = "multi_thread")]
async fn same_seed_gives_the_same_game() {
    let app = app();
    let a = create(&app, json!({"variant": 3, "seed": 17})).await;
    let b = create(&app, json!({"variant": 3, "seed": 17})).await;
    assert_ne!(a, b);
    let (_, va) = call(&app, Method::GET, &format!("/sessions/{a}/view"), None).await;
    let (_, vb) = call(&app, Method::GET, &format!("/sessions/{b}/view"), None).await;
    for k in ["my_values", "labels", "colors", "turn_order"] {
        assert_eq!(va[k], vb[k], "{k}");
    }
    let state = GameState::new(GameConfig::variant(3, 17)).unwrap();
    let mine: Vec<Cents> = serde_json::from_value(va["my_values"].clone()).unwrap();
    assert_eq!(mine, state.valuations().row(PlayerId(0)));
}

#[tokio::test(flavor = "multi_thread")]
async fn the_view_shows_holdings_and_hides_opponent_values() {
    let app = app();
    let seed = 23;
    let id = create(&app, json!({"variant": 4, "seed": seed, "human_seat": 1})).await;
    let view = settle(&app, &id).await;
    assert_eq!(view["seat"], 1);
    assert_eq!(view["colors"], json!(["green", "red", "blue", "purple"]));
    assert_eq!(view["holdings"].as_array().unwrap().len(), 3);
    assert!(view["holdings"].as_array().unwrap().iter().all(|r| r.as_array().unwrap().len() == 4));
    assert_eq!(view["my_values"].as_array().unwrap().len(), 4);
    assert_eq!(view["total_turns"], 9);

    let state = GameState::new(GameConfig::variant(4, seed)).unwrap();
    let (_, events) = call(&app, Method::GET, &format!("/sessions/{id}/events?since=0"), None).await;
    for text in [view.to_string(), events.to_string()] {
        assert!(!text.contains("valuations"));
        for p in [0, 2] {
            let row = serde_json::to_string(state.valuations().row(PlayerId(p))).unwrap();
            assert!(!text.contains(&row), "seat {p} values leaked");
        }
    }
    for k in view.as_object().unwrap().keys() {
        let allowed = ["my_values", "my_total_value"].contains(&k.as_str());
        assert!(allowed || !(k.contains("value") || k.contains("belief")), "{k}");
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn preview_reports_the_proposer_value_change() {
    let seed = (0..10_000u64)
        .find(|&s| {
            let st = GameState::new(GameConfig::variant(3, s)).unwrap();
            st.valuations().row(PlayerId(0))[1] == Cents(80)
        })
        .expect("some seed gives red 80");
    let app = app();
    let id = create(&app, json!({"variant": 3, "seed": seed})).await;
    let (status, p) = call(&app, Method::GET, &format!("/sessions/{id}/preview?offer=green:2,red:1"), None).await;
    assert_eq!(status, StatusCode::OK, "{p}");
    assert_eq!(p["role"], "proposer");
    assert_eq!(p["valid"], true);
    assert_eq!(p["value_change"], -20);
    assert_eq!(p["projected_value"].as_i64().unwrap(), p["current_value"].as_i64().unwrap() - 20);

    let (_, p) = call(&app, Method::GET, &format!("/sessions/{id}/preview?offer=green:99,red:1"), None).await;
    assert_eq!(p["valid"], false);
    assert_eq!(p["violation"], "insufficient_inventory");
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}/preview?offer=green2"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

/// Proposes 11 red for 1 green and answers every offer with No.
struct Greedy11;

impl Transport for Greedy11 {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        Ok(if request.messages[0].content.contains("GET_COLOR") {
            "<GET_COLOR>red</GET_COLOR><GET_QUANTITY>11</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY>"
        } else {
            "<CHOICE>No</CHOICE>"
        }
        .to_string())
    }
}

fn llm_app(cfg: ServiceConfig) -> AppState {
    let profiles = Profiles::parse("[profiles.fake]\nmodel = \"m\"\nendpoint = \"http://127.0.0.1:9/\"\n").unwrap();
    let roster = Roster::new(profiles).with_transports(Arc::new(|_, _| Ok(Box::new(Greedy11))));
    Service::new(cfg, roster)
}

#[tokio::test(flavor = "multi_thread")]
async fn accepting_an_unaffordable_offer_is_rejected() {
    let app = llm_app(config());
    let id = create(&app, json!({"variant": 2, "seed": 4, "agents": ["llm:fake", "llm:fake"]})).await;
    let view = loop {
        let view = settle(&app, &id).await;
        match view["phase"].as_str().unwrap() {
            "your_response" => break view,
            "your_proposal" => {
                call(&app, Method::POST, &format!("/sessions/{id}/proposal"), Some(json!({"pass": true}))).await;
            }
            other => panic!("no offer reached the human: {other}"),
        }
    };
    assert_eq!(view["active_offer"]["offer"]["get_qty"], 11);
    assert!(view["holdings"][0][1].as_u64().unwrap() < 11);
    assert_eq!(view["can_accept"], false);
    let (_, p) = call(&app, Method::GET, &format!("/sessions/{id}/preview"), None).await;
    assert_eq!(p["role"], "responder");
    assert_eq!(p["violation"], "insufficient_inventory");

    let uri = format!("/sessions/{id}/response");
    let (status, err) = call(&app, Method::POST, &uri, Some(json!({"choice": "accept"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["error"], "insufficient_inventory");
    let (status, _) = call(&app, Method::POST, &uri, Some(json!({"choice": "decline"}))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread")]
async fn error_statuses() {
    let app = app();
    let (status, v) = call(&app, Method::GET, "/sessions/00000000000000ff/view", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_session");
    let (status, _) = call(&app, Method::GET, "/sessions/not-hex/view", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    for bad in [json!({"variant": 7}), json!({"colour": 3}), json!({"agents": ["robot", "random"]}), json!({"human_seat": 3})] {
        let (status, v) = call(&app, Method::POST, "/sessions", Some(bad.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad} -> {v}");
        assert_eq!(v["error"], "bad_request");
    }

    let id = create(&app, json!({"variant": 3, "seed": 1})).await;
    let view = loop {
        let view = settle(&app, &id).await;
        match view["phase"].as_str().unwrap() {
            "your_proposal" => break view,
            "your_response" => {
                call(&app, Method::POST, &format!("/sessions/{id}/response"), Some(json!({"choice": "decline"}))).await;
            }
            other => panic!("human never proposed: {other}"),
        }
    };
    assert_eq!(view["phase"], "your_proposal");
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/response"), Some(json!({"choice": "accept"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "not_your_turn");

    let uri = format!("/sessions/{id}/proposal");
    let same = json!({"give_color": "red", "give_qty": 1, "get_color": "red", "get_qty": 1});
    let (status, v) = call(&app, Method::POST, &uri, Some(same)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "same_color");
    let unknown = json!({"give_color": "teal", "give_qty": 1, "get_color": "red", "get_qty": 1});
    let (status, v) = call(&app, Method::POST, &uri, Some(unknown)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "unknown_color");
    let (status, _) = call(&app, Method::POST, &uri, Some(json!({"give_color": "red"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/response"), Some(json!({"choice": "maybe"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let end = play_out(&app, &id).await;
    assert_eq!(end["phase"], "ended");
    let (status, v) = call(&app, Method::POST, &uri, Some(json!({"pass": true}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "game_over");
}

#[tokio::test(flavor = "multi_thread")]
async fn event_stream_replays_the_whole_game() {
    let app = app();
    let id = create(&app, json!({"variant": 3, "seed": 9})).await;
    let end = play_out(&app, &id).await;
    let (_, page) = call(&app, Method::GET, &format!("/sessions/{id}/events?since=0"), None).await;
    let events = page["events"].as_array().unwrap();
    let seqs: Vec<u64> = events.iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, (1..=seqs.len() as u64).collect::<Vec<_>>());
    assert_eq!(page["last_seq"], seqs.len());
    assert_eq!(end["last_seq"], seqs.len());

    let count = |t: &str| events.iter().filter(|e| e["type"] == t).count();
    let history: Vec<TurnRecord> = serde_json::from_value(end["history"].clone()).unwrap();
    let trade_turns = history.iter().filter(|r| !r.offer.is_pass()).count();
    assert_eq!(count("TurnOpened"), 9);
    assert_eq!(count("ProposalMade"), 9);
    assert_eq!(count("ResponsesRevealed"), trade_turns);
    assert_eq!(count("TradeExecuted"), history.iter().filter(|r| r.executed).count());
    assert_eq!(count("TradeExecuted") + count("TradeFailed"), 9);
    assert_eq!(count("GameEnded"), 1);
    assert_eq!(events.last().unwrap()["type"], "GameEnded");
    assert_eq!(events.last().unwrap()["payout"], end["payout"]["payout"]);

    let (_, tail) = call(&app, Method::GET, &format!("/sessions/{id}/events?since=5"), None).await;
    assert_eq!(tail["events"][0]["seq"], 6);
    // an ended game answers a long poll immediately
    let (_, empty) = call(&app, Method::GET, &format!("/sessions/{id}/events?since=999&wait_ms=30000"), None).await;
    assert_eq!(empty["events"], json!([]));
}

/// Replays the human's recorded proposals and responses.
struct Replay {
    proposals: Vec<TradeOffer>,
    responses: Vec<Response>,
}

impl Agent for Replay {
    fn kind(&self) -> &str {
        "replay"
    }
    fn propose(&mut self, _: &Observation<'_>) -> TradeOffer {
        self.proposals.remove(0)
    }
    fn respond(&mut self, _: &Observation<'_>, _: &Offer) -> Response {
        self.responses.remove(0)
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn a_session_matches_the_same_game_played_headless() {
    let (variant, seed) = (3, 31);
    let app = app();
    let id = create(&app, json!({"variant": variant, "seed": seed})).await;
    let end = play_out(&app, &id).await;
    let history: Vec<TurnRecord> = serde_json::from_value(end["history"].clone()).unwrap();
    let me = PlayerId(0);
    let replay = Replay {
        proposals: history.iter().filter(|r| r.proposer == me).map(|r| r.offer).collect(),
        responses: history
            .iter()
            .filter(|r| r.proposer != me && !r.offer.is_pass())
            .map(|r| r.responses[0].unwrap())
            .collect(),
    };
    assert!(history.iter().any(|r| r.executed), "pick a seed where something trades");

    let specs = [AgentSpec::Human, AgentSpec::Bayesian, AgentSpec::Bayesian];
    let mut state = GameState::new(GameConfig::variant(variant, seed)).unwrap();
    let mut seats: Vec<Box<dyn Agent + Send>> = vec![Box::new(replay)];
    for p in 1..3 {
        let s = seat_seed(state.config().rng_seed, p);
        seats.push(builtin_agent(&specs[p], state.config(), PlayerId(p), s, options_for(&specs)).unwrap());
    }
    play_game(&mut state, &mut seats).unwrap();
    assert_eq!(state.history(), &history[..]);
    let holdings: Value = serde_json::to_value(state.holdings()).unwrap();
    assert_eq!(holdings, end["holdings"]);
    assert_eq!(end["payout"]["abandoned"], false);
}

#[tokio::test(flavor = "multi_thread")]
async fn idle_sessions_are_abandoned_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig {
        session_ttl: Duration::from_millis(50),
        log_dir: Some(dir.path().to_path_buf()),
        ..config()
    };
    let app = Service::new(cfg, Roster::default());
    let id = create(&app, json!({"variant": 2, "seed": 2})).await;
    let view = settle(&app, &id).await;
    assert_ne!(view["phase"], "ended");
    tokio::time::sleep(Duration::from_millis(80)).await;
    reap_once(&app).await;

    let (status, view) = call(&app, Method::GET, &format!("/sessions/{id}/view"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["phase"], "ended");
    assert_eq!(view["payout"]["abandoned"], true);
    let (_, page) = call(&app, Method::GET, &format!("/sessions/{id}/events?since=0"), None).await;
    let last = page["events"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["type"], "GameEnded");
    assert_eq!(last["abandoned"], true);

    let logs = chipbargain::io::read_logs(&dir.path().join("sessions.jsonl")).unwrap();
    assert_eq!(logs.len(), 1);
    assert_eq!(logs[0].header.seats, ["human", "bayesian", "bayesian"]);

    // the view above touched it; two idle TTLs later it is gone
    tokio::time::sleep(Duration::from_millis(120)).await;
    reap_once(&app).await;
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}/view"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
