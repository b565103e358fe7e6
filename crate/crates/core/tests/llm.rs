use chipbargain_core::agents::{Agent, Observation};
use chipbargain_core::game::{ColorId, GameConfig, GameState, Offer, PlayerId, Response, TradeOffer};
use chipbargain_core::llm::*;
use chipbargain_core::play::{commit_turn, play_game};
use chipbargain_core::Cents;

const GREEN: ColorId = ColorId(0);
const RED: ColorId = ColorId(1);
const BLUE: ColorId = ColorId(2);

fn cfg() -> GameConfig {
    GameConfig::variant(3, 11)
}

const WELL_FORMED: &str = "<REASONING>\nI want more red.\n</REASONING>\n\n<CHECK>\nI have 10 green.\n<\\CHECK>\n\n<GET_COLOR> red</GET_COLOR>\n<GET_QUANTITY> 2 </GET_QUANTITY>\n<GIVE_COLOR> green</GIVE_COLOR>\n<GIVE_QUANTITY> 3 </GIVE_QUANTITY>";

#[test]
fn well_formed_proposal() {
    let p = parse_proposal(&cfg(), WELL_FORMED).unwrap();
    assert_eq!(p.offer, Offer::new(GREEN, 3, RED, 2));
    assert_eq!(p.reasoning.as_deref(), Some("I want more red."));
    assert_eq!(p.check.as_deref(), Some("I have 10 green."));
}

#[test]
fn tags_are_case_and_space_insensitive() {
    let text = "< get_color >Red Chips</ GET_COLOR >< Get_Quantity>1<\\get_quantity>\n<give_color> BLUE </give_color><GIVE_QUANTITY>4</GIVE_QUANTITY >";
    let p = parse_proposal(&cfg(), text).unwrap();
    assert_eq!(p.offer, Offer::new(BLUE, 4, RED, 1));
    assert_eq!(p.reasoning, None);
    assert_eq!(p.check, None);
}

#[test]
fn singular_chip_suffix_is_accepted() {
    let text = "<GET_COLOR>red chip</GET_COLOR><GET_QUANTITY>1</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY>";
    assert_eq!(parse_proposal(&cfg(), text).unwrap().offer, Offer::new(GREEN, 1, RED, 1));
}

#[test]
fn missing_close_tag_is_reported_with_span() {
    let text = "<GET_COLOR>red</GET_COLOR><GET_QUANTITY>2<GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY>";
    let e = parse_proposal(&cfg(), text).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Unclosed("GET_QUANTITY"));
    assert_eq!(&text[e.span.start..e.span.start + 14], "<GET_QUANTITY>");
}

#[test]
fn reopened_tag_before_close_is_unclosed() {
    let text = "<GET_COLOR>red<GET_COLOR>red</GET_COLOR><GET_QUANTITY>2</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY>";
    let e = parse_proposal(&cfg(), text).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Unclosed("GET_COLOR"));
    assert_eq!(e.span, 0..14);
}

#[test]
fn missing_tag() {
    let text = "<GET_COLOR>red</GET_COLOR><GET_QUANTITY>2</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR>";
    let e = parse_proposal(&cfg(), text).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::MissingTag("GIVE_QUANTITY"));
}

#[test]
fn unknown_color_points_at_the_value() {
    let text = "<GET_COLOR>  orange </GET_COLOR><GET_QUANTITY>2</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY>";
    let e = parse_proposal(&cfg(), text).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UnknownColor("orange".into()));
    assert_eq!(&text[e.span], "orange");
    // purple exists only in the four-color game
    let text = text.replace("orange", "purple");
    assert!(parse_proposal(&cfg(), &text).is_err());
    assert!(parse_proposal(&GameConfig::variant(4, 0), &text).is_ok());
}

#[test]
fn quantities_must_be_positive_integers() {
    for bad in ["0", "-2", "n", "2.5", "two", "", "+3"] {
        let text = format!("<GET_COLOR>red</GET_COLOR><GET_QUANTITY>{bad}</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY>");
        let e = parse_proposal(&cfg(), &text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BadQuantity(bad.into()), "{bad}");
    }
}

#[test]
fn stray_angle_brackets_are_skipped() {
    let text = "a < b and <x> then <GET_COLOR>red</GET_COLOR><GET_QUANTITY>1</GET_QUANTITY><GIVE_COLOR>green</GIVE_COLOR><GIVE_QUANTITY>1</GIVE_QUANTITY> <";
    assert!(parse_proposal(&cfg(), text).is_ok());
}

#[test]
fn choices() {
    assert_eq!(parse_response("<CHOICE>Yes</CHOICE>").unwrap().choice, Response::Accept);
    assert_eq!(parse_response("<REASONING>meh</REASONING>\n< choice > no. <\\CHOICE>").unwrap().choice, Response::Decline);
    assert_eq!(parse_response("<REASONING>meh</REASONING><CHOICE>No</CHOICE>").unwrap().reasoning.as_deref(), Some("meh"));
    let e = parse_response("<CHOICE>Maybe</CHOICE>").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::BadChoice("Maybe".into()));
    assert_eq!(e.span, 8..13);
    assert_eq!(parse_response("Yes").unwrap_err().kind, ParseErrorKind::MissingTag("CHOICE"));
    assert_eq!(parse_response("<CHOICE>Yes").unwrap_err().kind, ParseErrorKind::Unclosed("CHOICE"));
}

fn idea(get: &str, gq: u32, give: &str, vq: u32) -> String {
    format!("<REASONING>idea {get}</REASONING>\n<CHECK>ok<\\CHECK>\n<GET_COLOR>{get}</GET_COLOR>\n<GET_QUANTITY>{gq}</GET_QUANTITY>\n<GIVE_COLOR>{give}</GIVE_COLOR>\n<GIVE_QUANTITY>{vq}</GIVE_QUANTITY>\n")
}

#[test]
fn candidates_are_extracted_in_order_up_to_the_limit() {
    let text = [idea("red", 1, "green", 1), idea("blue", 2, "green", 1), idea("red", 3, "blue", 1), idea("blue", 1, "red", 1)].concat();
    let c = parse_candidates(&cfg(), &text, 3).unwrap();
    assert_eq!(c.len(), 3);
    assert_eq!(c[1].offer, Offer::new(GREEN, 1, BLUE, 2));
    assert_eq!(c[1].reasoning.as_deref(), Some("idea blue"));
    assert_eq!(c[2].offer, Offer::new(BLUE, 1, RED, 3));
}

#[test]
fn malformed_candidates_are_skipped() {
    let text = [idea("red", 0, "green", 1), idea("blue", 2, "green", 1)].concat();
    let c = parse_candidates(&cfg(), &text, 3).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].offer, Offer::new(GREEN, 1, BLUE, 2));
    let e = parse_candidates(&cfg(), &idea("red", 0, "green", 1), 3).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::BadQuantity("0".into()));
    let e = parse_candidates(&cfg(), "nothing", 3).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::MissingTag("GET_COLOR"));
}

fn state() -> GameState {
    GameState::new(cfg()).unwrap()
}

#[test]
fn responder_prompt_embeds_signed_surplus() {
    let s = state();
    let mut values = s.valuations().row(PlayerId(1)).to_vec();
    values[RED.0] = Cents(80);
    let mut obs = Observation::for_player(&s, PlayerId(1));
    obs.my_values = &values;
    // responder receives 2 red at 0.80 and pays 1 green
    let offer = Offer::new(RED, 2, GREEN, 1);
    let p = build_prompt(PromptRole::Responder, &obs, Some((PlayerId(0), &offer)), None, 0.5).unwrap();
    assert!(p.text.contains("Player 1 is offering to give 2 red and get 1 green in return."));
    assert!(p.text.contains("your total wealth will change by: +1.10"));
    assert!(p.text.starts_with(RULES));
    assert_eq!(signed_dollars(Cents(-20)), "-0.20");
}

#[test]
fn proposer_prompt_lists_own_holdings_and_is_deterministic() {
    let s = state();
    let obs = Observation::for_player(&s, PlayerId(2));
    let a = build_prompt(PromptRole::Proposer, &obs, None, None, 0.5).unwrap();
    let b = build_prompt(PromptRole::Proposer, &obs, None, None, 0.5).unwrap();
    assert_eq!(a, b);
    assert!(a.text.contains("You are Player 3."));
    assert!(a.text.contains("You now have the following amounts of each chip: 10 green, 10 red, 10 blue."));
    assert!(!a.text.contains("{{"));
    assert_eq!(a.temperature, 0.5);
}

#[test]
fn select_prompt_lists_every_candidate() {
    let s = state();
    let obs = Observation::for_player(&s, PlayerId(0));
    let cands = vec![
        Candidate { reasoning: Some("a".into()), offer: Offer::new(GREEN, 1, RED, 1) },
        Candidate { reasoning: None, offer: Offer::new(GREEN, 2, BLUE, 3) },
        Candidate { reasoning: Some("c".into()), offer: Offer::new(RED, 4, BLUE, 1) },
    ];
    let p = build_prompt(PromptRole::RefinedSelect, &obs, None, Some(&cands), 0.5).unwrap();
    for i in 1..=3 {
        assert!(p.text.contains(&format!("Trade idea {i}:")));
    }
    assert!(p.text.contains("<GIVE_QUANTITY>4</GIVE_QUANTITY>"));
    assert_eq!(
        build_prompt(PromptRole::RefinedSelect, &obs, None, Some(&[]), 0.5).unwrap_err(),
        TemplateError::MissingCandidates
    );
    assert_eq!(build_prompt(PromptRole::Responder, &obs, None, None, 0.5).unwrap_err(), TemplateError::MissingOffer);
}

#[test]
fn history_reads_like_a_ledger() {
    let mut s = state();
    let proposer = s.current_proposer().unwrap();
    let offer = TradeOffer::trade(GREEN, 1, RED, 1);
    let responses: Vec<Option<Response>> =
        (0..3).map(|p| (p != proposer.0).then_some(Response::Decline)).collect();
    commit_turn::<Box<dyn Agent + Send>>(&mut s, &offer, &responses, None, &mut []).unwrap();
    let h = render_history(s.config(), s.history());
    assert!(h.contains("Round 1, turn 1:"));
    assert!(h.contains("offered to give 1 green and get 1 red."));
    assert!(h.contains("; no trade."));
    assert!(render_history(s.config(), &[]).starts_with("empty"));
}

fn proposal_reply(get: &str, gq: u32, give: &str, vq: u32) -> String {
    format!("<REASONING>r</REASONING><CHECK>c<\\CHECK><GET_COLOR>{get}</GET_COLOR><GET_QUANTITY>{gq}</GET_QUANTITY><GIVE_COLOR>{give}</GIVE_COLOR><GIVE_QUANTITY>{vq}</GIVE_QUANTITY>")
}

#[test]
fn scripted_proposal_reaches_the_engine_verbatim() {
    let s = state();
    let me = s.current_proposer().unwrap();
    let t = ScriptedTransport::new([proposal_reply("blue", 3, "red", 2)]);
    let mut agent = LlmAgent::new(t, LlmProfile::new("m", PromptStyle::OutOfBox));
    let obs = Observation::for_player(&s, me);
    assert_eq!(agent.propose(&obs), TradeOffer::trade(RED, 2, BLUE, 3));
    assert_eq!(agent.transport().requests.len(), 1);
    let req = &agent.transport().requests[0];
    assert_eq!(req.model, "m");
    assert_eq!(req.temperature, 0.5);
    assert_eq!(req.messages.len(), 1);
    assert_eq!(req.messages[0].role, "user");
    assert!(agent.degraded().is_empty());
}

#[test]
fn garbage_three_times_degrades_to_flagged_pass() {
    let s = state();
    let me = s.current_proposer().unwrap();
    let t = ScriptedTransport::new(["garbage", "more garbage", "<GET_COLOR>red"]);
    let mut agent = LlmAgent::new(t, LlmProfile::new("m", PromptStyle::OutOfBox));
    assert_eq!(agent.propose(&Observation::for_player(&s, me)), TradeOffer::Pass);
    assert_eq!(agent.transport().requests.len(), 3);
    assert_eq!(agent.degraded().len(), 1);
    assert_eq!(agent.degraded()[0].role, PromptRole::Proposer);
    assert_eq!(agent.transcript().len(), 3);
    assert!(agent.transcript().iter().all(|e| e.rejected.is_some()));
}

#[test]
fn invalid_offers_count_as_failed_attempts() {
    let s = state();
    let me = s.current_proposer().unwrap();
    let t = ScriptedTransport::new([
        proposal_reply("red", 1, "green", 11),
        proposal_reply("red", 1, "red", 1),
        proposal_reply("red", 1, "green", 10),
    ]);
    let mut agent = LlmAgent::new(t, LlmProfile::new("m", PromptStyle::OutOfBox));
    assert_eq!(agent.propose(&Observation::for_player(&s, me)), TradeOffer::trade(GREEN, 10, RED, 1));
    assert_eq!(agent.transcript().len(), 3);
}

#[test]
fn transport_failures_degrade_responses_to_decline() {
    let s = state();
    let me = s.responders()[0];
    let mut t = ScriptedTransport::default();
    t.push_failure("timeout");
    t.push_failure("timeout");
    t.push_failure("timeout");
    let mut agent = LlmAgent::new(t, LlmProfile::new("m", PromptStyle::OutOfBox));
    let r = agent.respond(&Observation::for_player(&s, me), &Offer::new(GREEN, 1, RED, 1));
    assert_eq!(r, Response::Decline);
    assert_eq!(agent.degraded()[0].role, PromptRole::Responder);
    assert_eq!(agent.transcript()[0].reply, Err("timeout".into()));
}

#[test]
fn retry_budget_is_configurable() {
    let s = state();
    let me = s.responders()[0];
    let t = ScriptedTransport::new(["nope", "<CHOICE>yes</CHOICE>"]);
    let mut profile = LlmProfile::new("m", PromptStyle::OutOfBox);
    profile.retries = 0;
    let mut agent = LlmAgent::new(t, profile);
    assert_eq!(agent.respond(&Observation::for_player(&s, me), &Offer::new(GREEN, 1, RED, 1)), Response::Decline);
    assert_eq!(agent.transport().remaining(), 1);
}

#[test]
fn refined_profile_makes_exactly_two_calls() {
    let s = state();
    let me = s.current_proposer().unwrap();
    let ideas = [idea("red", 1, "green", 1), idea("blue", 2, "green", 1), idea("red", 3, "blue", 1)].concat();
    let t = ScriptedTransport::new([ideas, proposal_reply("blue", 2, "green", 1)]);
    let mut agent = LlmAgent::new(t, LlmProfile::new("m", PromptStyle::Refined));
    assert_eq!(agent.kind(), "llm-refined");
    assert_eq!(agent.propose(&Observation::for_player(&s, me)), TradeOffer::trade(GREEN, 1, BLUE, 2));
    let reqs = &agent.transport().requests;
    assert_eq!(reqs.len(), 2);
    assert!(reqs[0].messages[0].content.contains("Propose 3 different good trade ideas"));
    let select = &reqs[1].messages[0].content;
    assert!(select.contains("Proposed trade ideas to choose from:\nTrade idea 1:"));
    assert!(select.contains("Trade idea 3:"));
}

#[test]
fn refined_generation_failure_degrades_without_selecting() {
    let s = state();
    let me = s.current_proposer().unwrap();
    let t = ScriptedTransport::new(["x", "y", "z"]);
    let mut agent = LlmAgent::new(t, LlmProfile::new("m", PromptStyle::Refined));
    assert_eq!(agent.propose(&Observation::for_player(&s, me)), TradeOffer::Pass);
    assert_eq!(agent.transport().requests.len(), 3);
    assert_eq!(agent.degraded()[0].role, PromptRole::RefinedGenerate);
}

#[test]
fn llm_seats_never_crash_a_game() {
    let config = cfg();
    let mut s = GameState::new(config).unwrap();
    let mut agents: Vec<LlmAgent<ScriptedTransport>> = (0..3)
        .map(|_| {
            let mut t = ScriptedTransport::default();
            for i in 0..40 {
                if i % 3 == 0 {
                    t.push_reply(proposal_reply("red", 1, "green", 1));
                } else if i % 3 == 1 {
                    t.push_reply("<CHOICE>Yes</CHOICE>");
                } else {
                    t.push_reply("???");
                }
            }
            LlmAgent::new(t, LlmProfile::new("m", PromptStyle::OutOfBox))
        })
        .collect();
    play_game(&mut s, &mut agents).unwrap();
    assert_eq!(s.history().len(), 9);
    let total: u64 = s.holdings().column_sums().iter().sum();
    assert_eq!(total, 90);
}

#[test]
fn profile_defaults_from_serde() {
    let p: LlmProfile = serde_json::from_str(r#"{"model":"x"}"#).unwrap();
    assert_eq!(p.style, PromptStyle::OutOfBox);
    assert_eq!(p.temperature, 0.5);
    assert_eq!(p.retries, 2);
}
